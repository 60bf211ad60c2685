// Copyright 2026 The GAS Curriculum Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "gas/errors.hpp"

namespace gas {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("line {}: '{}' is not a number", line, s));
  }
}

}  // namespace

void write_metrics_header(std::ostream& out) { out << kMetricsHeader << "\n"; }

void write_metrics_row(std::ostream& out, const MetricsRow& r,
                       bool record_wall_clock) {
  out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.episode, r.env_steps,
                     r.model_updates, r.alpha, r.level, r.episode_return,
                     r.success ? 1 : 0, r.epsilon, r.mean_loss,
                     record_wall_clock ? r.wall_clock : 0.0);
}

std::vector<MetricsRow> read_metrics(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw ConfigError("metrics file: unexpected header");
  }
  std::vector<MetricsRow> rows;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 10) throw ConfigError(fmt::format("metrics line {}: 10 columns expected", n));
    MetricsRow r;
    r.episode = static_cast<std::int64_t>(parse_double(c[0], n));
    r.env_steps = static_cast<std::int64_t>(parse_double(c[1], n));
    r.model_updates = static_cast<std::int64_t>(parse_double(c[2], n));
    r.alpha = parse_double(c[3], n);
    r.level = static_cast<int>(parse_double(c[4], n));
    r.episode_return = parse_double(c[5], n);
    r.success = parse_double(c[6], n) != 0.0;
    r.epsilon = parse_double(c[7], n);
    r.mean_loss = parse_double(c[8], n);
    r.wall_clock = parse_double(c[9], n);
    rows.push_back(r);
  }
  return rows;
}

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  if (window < 1) throw ConfigError("moving average window must be >= 1");
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) sum -= values[i - window];
    const std::size_t n = std::min<std::size_t>(i + 1, window);
    out[i] = sum / static_cast<double>(n);
  }
  return out;
}

Aggregate aggregate(const std::vector<std::vector<MetricsRow>>& seeds,
                    CurveKind kind, int window) {
  if (seeds.empty()) throw ConfigError("aggregate needs at least one seed");
  Aggregate agg;
  agg.x_axis = kind == CurveKind::kTrainingReturn ? "episode" : "eval_episode";
  agg.y_name = kind == CurveKind::kTrainingReturn ? "return" : "winrate";

  std::vector<std::vector<double>> smoothed;
  std::vector<std::vector<const MetricsRow*>> selected;
  for (const auto& rows : seeds) {
    std::vector<double> ys;
    std::vector<const MetricsRow*> sel;
    for (const auto& r : rows) {
      const bool eval = r.epsilon == 0.0;
      if (kind == CurveKind::kTrainingReturn && eval) continue;
      if (kind == CurveKind::kEvalWinrate && !eval) continue;
      ys.push_back(kind == CurveKind::kTrainingReturn ? r.episode_return
                                                      : (r.success ? 1.0 : 0.0));
      sel.push_back(&r);
    }
    smoothed.push_back(moving_average(ys, window));
    selected.push_back(std::move(sel));
  }
  std::size_t len = smoothed.front().size();
  for (const auto& s : smoothed) len = std::min(len, s.size());
  const int n = static_cast<int>(seeds.size());
  for (std::size_t i = 0; i < len; ++i) {
    AggregatePoint p;
    p.x = static_cast<double>(i);
    p.seeds = n;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      sum += smoothed[k][i];
      p.env_steps += static_cast<double>(selected[k][i]->env_steps) / n;
      p.model_updates += static_cast<double>(selected[k][i]->model_updates) / n;
    }
    p.mean = sum / n;
    if (n > 1) {
      double ss = 0.0;
      for (int k = 0; k < n; ++k) ss += (smoothed[k][i] - p.mean) * (smoothed[k][i] - p.mean);
      p.stderr_ = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
    }
    agg.points.push_back(p);
  }
  return agg;
}

void write_aggregate(std::ostream& out, const Aggregate& agg) {
  out << agg.x_axis << ",env_steps,model_updates," << agg.y_name
      << "_mean," << agg.y_name << "_stderr,seeds\n";
  for (const auto& p : agg.points) {
    out << fmt::format("{},{},{},{},{},{}\n", p.x, p.env_steps, p.model_updates,
                       p.mean, p.stderr_, p.seeds);
  }
}

Aggregate read_aggregate(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("aggregate file: empty");
  const auto head = split_csv(line);
  if (head.size() != 6 || head[1] != "env_steps" || head[2] != "model_updates") {
    throw ConfigError("aggregate file: unexpected header");
  }
  Aggregate agg;
  agg.x_axis = head[0];
  const auto pos = head[3].rfind("_mean");
  if (pos == std::string::npos) throw ConfigError("aggregate file: unexpected header");
  agg.y_name = head[3].substr(0, pos);
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 6) throw ConfigError(fmt::format("aggregate line {}: 6 columns expected", n));
    AggregatePoint p;
    p.x = parse_double(c[0], n);
    p.env_steps = parse_double(c[1], n);
    p.model_updates = parse_double(c[2], n);
    p.mean = parse_double(c[3], n);
    p.stderr_ = parse_double(c[4], n);
    p.seeds = static_cast<int>(parse_double(c[5], n));
    agg.points.push_back(p);
  }
  return agg;
}

}  // namespace gas
