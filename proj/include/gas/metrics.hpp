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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gas {

// One finished episode. Evaluation episodes (greedy) carry epsilon == 0.
struct MetricsRow {
  std::int64_t episode = 0;
  std::int64_t env_steps = 0;
  std::int64_t model_updates = 0;
  double alpha = 0.0;
  int level = 0;
  double episode_return = 0.0;
  bool success = false;
  double epsilon = 0.0;
  double mean_loss = 0.0;
  double wall_clock = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "episode,env_steps,model_updates,alpha,level,episode_return,success,"
    "epsilon,mean_loss,wall_clock";

void write_metrics_header(std::ostream& out);
// Values are printed with round-trip precision. When record_wall_clock is
// false the wall_clock column is written as 0 so reruns are byte-identical.
void write_metrics_row(std::ostream& out, const MetricsRow& row,
                       bool record_wall_clock);
std::vector<MetricsRow> read_metrics(std::istream& in);

// Which rows and which x-axis an aggregate uses.
enum class CurveKind {
  kTrainingReturn,  // all rows with epsilon > 0, y = episode_return, x = episode
  kEvalWinrate,     // rows with epsilon == 0, y = success, x = eval index
};

struct AggregatePoint {
  double x = 0.0;
  double env_steps = 0.0;      // mean over seeds
  double model_updates = 0.0;  // mean over seeds
  double mean = 0.0;
  double stderr_ = 0.0;
  int seeds = 0;
};

struct Aggregate {
  std::string x_axis;  // "episode" or "eval_episode"
  std::string y_name;  // "return" or "winrate"
  std::vector<AggregatePoint> points;
};

// Trailing moving average (window w, shorter at the start).
std::vector<double> moving_average(const std::vector<double>& values, int window);

// Per seed: select rows for `kind`, smooth with the moving average; then
// per x index (up to the shortest seed) mean and standard error
// (sample std / sqrt(n), 0 for one seed) across seeds.
Aggregate aggregate(const std::vector<std::vector<MetricsRow>>& seeds,
                    CurveKind kind, int window);

void write_aggregate(std::ostream& out, const Aggregate& agg);
Aggregate read_aggregate(std::istream& in);

}  // namespace gas
