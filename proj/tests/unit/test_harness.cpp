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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "gas/config.hpp"
#include "gas/errors.hpp"
#include "gas/harness.hpp"
#include "gas/metrics.hpp"
#include "gas/plot.hpp"

using namespace gas;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gas_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::pair<double, double>> svg_points(const std::string& svg,
                                                  const std::string& cls) {
  const std::regex re(cls + "\" points=\"([^\"]*)\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, re));
  std::vector<std::pair<double, double>> out;
  std::istringstream in(m[1].str());
  std::string tok;
  while (in >> tok) {
    const auto comma = tok.find(',');
    out.emplace_back(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
  }
  return out;
}

ExperimentConfig tiny_control_experiment(const fs::path& dir) {
  std::istringstream in(
      "[experiment]\nname = tiny\ntask = mountain_car\nseeds = 3, 4\n"
      "output_dir = " + dir.string() + "\n"
      "[control]\ntotal_env_steps = 1200\nencoder_widths = 16, 16\nrefine_width = 16\n"
      "batch_size = 16\n[curriculum]\nlead_in = 200\ngrowth = 200\n");
  return parse_config(in, "tiny");
}

}  // namespace

TEST_CASE("config: defaults follow task and algorithm") {
  const auto mc = default_config("mountain_car", "gas");
  CHECK(mc.control.gamma == 0.99);
  CHECK(mc.schedule.lead_in == 25000);
  CHECK(mc.epsilon.steps == 25000);
  CHECK(default_config("acrobot", "gas").control.gamma == 0.998);
  CHECK(default_config("mountain_car", "slow_epsilon").epsilon.steps == 100000);
  const auto mb = default_config("microbattle", "gas");
  CHECK(mb.schedule.lead_in == 5000);
  CHECK(mb.schedule.growth == 10000);
  CHECK(mb.window == 500);
  CHECK(mb.adam.learning_rate == 2.5e-4);
  CHECK_THROWS_AS(default_config("pong", "gas"), ConfigError);
  CHECK_THROWS_AS(default_config("acrobot", "magic"), ConfigError);
}

TEST_CASE("config: serialise / parse round trip for every task and algorithm") {
  for (const char* task : {"acrobot", "mountain_car", "microbattle"}) {
    for (const char* alg : {"gas", "scratch_fixed_level", "on_ac", "sep_q", "max_target",
                            "slow_epsilon"}) {
      const auto c = default_config(task, alg);
      const std::string text = serialise(c);
      std::istringstream in(text);
      const auto back = parse_config(in);
      CHECK(serialise(back) == text);
    }
  }
  CHECK(config_keys().size() > 30);
}

TEST_CASE("config: environment overrides beat the file") {
  std::istringstream in("[experiment]\ntask = mountain_car\n[control]\ntotal_env_steps = 5000\n");
  const EnvOverrides env{{"GAS_CONTROL__TOTAL_ENV_STEPS", "1234"},
                         {"GAS_EXPERIMENT__SEEDS", "1,2,3"},
                         {"HOME", "/ignored"}};
  const auto c = parse_config(in, "f", env);
  CHECK(c.control.total_env_steps == 1234);
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
  std::istringstream in2("[experiment]\n");
  CHECK_THROWS_AS(parse_config(in2, "f", {{"GAS_CONTROL__NOPE", "1"}}), ConfigError);
}

TEST_CASE("config: diagnostics name file and line") {
  auto message = [](const std::string& text) -> std::string {
    std::istringstream in(text);
    try {
      parse_config(in, "exp.cfg");
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message("[control]\nbogus = 1\n").find("exp.cfg:2") != std::string::npos);
  CHECK(message("[experiment]\n\n# note\nseeds = x\n").find("exp.cfg:4") != std::string::npos);
  CHECK(message("[nowhere]\n").find("exp.cfg:1") != std::string::npos);
  CHECK(message("[control]\ngamma\n").find("exp.cfg:2") != std::string::npos);
  CHECK_FALSE(message("[control]\ngamma = 1.5\n").empty());
  CHECK(message("# only a comment\n[control]\ngamma = 0.9  # trailing\n").empty());
}

TEST_CASE("metrics: write / read round trip") {
  MetricsRow r;
  r.episode = 3;
  r.env_steps = 1500;
  r.model_updates = 375;
  r.alpha = 0.1 + 0.2;
  r.level = 1;
  r.episode_return = -1.0 / 3.0;
  r.success = true;
  r.epsilon = 0.55;
  r.mean_loss = 1e-7;
  r.wall_clock = 12.5;
  for (bool wall : {false, true}) {
    std::stringstream s;
    write_metrics_header(s);
    write_metrics_row(s, r, wall);
    const auto rows = read_metrics(s);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].alpha == r.alpha);
    CHECK(rows[0].episode_return == r.episode_return);
    CHECK(rows[0].success);
    CHECK(rows[0].wall_clock == (wall ? 12.5 : 0.0));
  }
  std::istringstream bad("episode,foo\n1,2\n");
  CHECK_THROWS_AS(read_metrics(bad), ConfigError);
}

TEST_CASE("aggregate: moving average, mean and standard error") {
  CHECK(moving_average({1, 2, 3, 4}, 2) == std::vector<double>{1, 1.5, 2.5, 3.5});
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 3.0);
  std::vector<std::vector<MetricsRow>> seeds(4);
  for (int s = 0; s < 4; ++s) {
    const int len = 30 + 5 * s;
    for (int i = 0; i < len; ++i) {
      MetricsRow r;
      r.episode = i;
      r.env_steps = 100 * (i + 1) + s;
      r.episode_return = n(rng);
      r.epsilon = 0.5;
      seeds[s].push_back(r);
      MetricsRow e = r;  // eval rows are excluded from training curves
      e.epsilon = 0.0;
      e.episode_return = 1e6;
      seeds[s].push_back(e);
    }
  }
  const int window = 7;
  const Aggregate agg = aggregate(seeds, CurveKind::kTrainingReturn, window);
  REQUIRE(agg.points.size() == 30);
  for (int i = 0; i < 30; ++i) {
    std::vector<double> smoothed;
    for (int s = 0; s < 4; ++s) {
      double sum = 0.0;
      int count = 0;
      for (int j = std::max(0, i - window + 1); j <= i; ++j, ++count) {
        sum += seeds[s][2 * j].episode_return;
      }
      smoothed.push_back(sum / count);
    }
    double mean = 0.0;
    for (double v : smoothed) mean += v / 4.0;
    double var = 0.0;
    for (double v : smoothed) var += (v - mean) * (v - mean) / 3.0;
    CHECK(std::abs(agg.points[i].mean - mean) <= 1e-12);
    CHECK(std::abs(agg.points[i].stderr_ - std::sqrt(var / 4.0)) <= 1e-12);
    CHECK(agg.points[i].seeds == 4);
    CHECK(agg.points[i].env_steps == doctest::Approx(100.0 * (i + 1) + 1.5));
  }
  std::stringstream io;
  write_aggregate(io, agg);
  const Aggregate back = read_aggregate(io);
  REQUIRE(back.points.size() == agg.points.size());
  for (std::size_t i = 0; i < agg.points.size(); ++i) {
    CHECK(back.points[i].mean == agg.points[i].mean);
    CHECK(back.points[i].stderr_ == agg.points[i].stderr_);
  }
  const Aggregate single = aggregate({seeds[0]}, CurveKind::kTrainingReturn, 1);
  CHECK(single.points[3].stderr_ == 0.0);
  const Aggregate evals = aggregate(seeds, CurveKind::kEvalWinrate, 500);
  CHECK(evals.y_name == "winrate");
  CHECK(evals.points.size() == 30);
}

TEST_CASE("plot: bands span plus/minus one standard error") {
  Aggregate a;
  a.x_axis = "episode";
  a.y_name = "return";
  for (int i = 0; i < 6; ++i) {
    a.points.push_back({static_cast<double>(i), 0, 0, std::sin(i), 0.2 + 0.3 * i, 3});
  }
  const std::string svg = render_svg({{"a", a}}, {});
  const auto mean = svg_points(svg, "mean");
  const auto band = svg_points(svg, "band");
  REQUIRE(mean.size() == 6);
  REQUIRE(band.size() == 12);
  // Band goes out along the upper edge and back along the lower one.
  double px_per_unit = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double top = band[i].second;
    const double bottom = band[11 - i].second;
    CHECK(band[i].first == mean[i].first);
    CHECK(std::abs(0.5 * (top + bottom) - mean[i].second) <= 0.01);
    const double ratio = (bottom - top) / (2.0 * a.points[i].stderr_);
    if (i == 0) px_per_unit = ratio;
    CHECK(ratio == doctest::Approx(px_per_unit).epsilon(1e-3));
  }
  CHECK(px_per_unit > 0.0);
  Aggregate other = a;
  other.x_axis = "eval_episode";
  CHECK_THROWS_AS(render_svg({{"a", a}, {"b", other}}, {}), ConfigError);
  CHECK(curve_label("runs/gas_aggregate.csv") == "gas");
}

TEST_CASE("harness: files, recomputable aggregate, checkpoints, determinism") {
  const fs::path dir = scratch_dir("harness");
  const auto cfg = tiny_control_experiment(dir);
  const RunResult r = run_experiment(cfg);
  REQUIRE(r.metrics_files.size() == 2);
  REQUIRE(r.checkpoints.size() == 2);
  CHECK(fs::exists(dir / "tiny.cfg"));
  CHECK(fs::exists(dir / "tiny_seed3.csv"));
  CHECK(fs::exists(dir / "tiny_aggregate.csv"));

  std::vector<std::vector<MetricsRow>> seeds;
  for (const auto& f : r.metrics_files) {
    std::ifstream in(f);
    seeds.push_back(read_metrics(in));
  }
  std::ifstream agg_in(r.aggregate_file);
  const Aggregate written = read_aggregate(agg_in);
  const Aggregate again = aggregate(seeds, CurveKind::kTrainingReturn, cfg.window);
  REQUIRE(written.points.size() == again.points.size());
  for (std::size_t i = 0; i < again.points.size(); ++i) {
    CHECK(std::abs(written.points[i].mean - again.points[i].mean) <= 1e-12);
    CHECK(std::abs(written.points[i].stderr_ - again.points[i].stderr_) <= 1e-12);
  }

  const Checkpoint ck = load_checkpoint(r.checkpoints[0]);
  CHECK(serialise(ck.config) == serialise(cfg));
  CHECK(!ck.networks.empty());
  const fs::path copy = dir / "copy.ckpt";
  std::vector<const nn::DenseNet<float>*> nets;
  for (const auto& n : ck.networks) nets.push_back(&n);
  save_checkpoint(copy.string(), ck.config, nets);
  CHECK(slurp(copy) == slurp(r.checkpoints[0]));
  const EvalSummary ev = evaluate_checkpoint(ck, 2, 0);
  CHECK(ev.episodes == 2);
  CHECK(ev.mean_return <= 1.0);
  CHECK(ev.mean_return >= -26.0);

  // Same config, same bytes.
  const std::string first = slurp(r.metrics_files[1]);
  const fs::path dir2 = scratch_dir("harness2");
  auto cfg2 = cfg;
  cfg2.output_dir = dir2.string();
  const RunResult r2 = run_experiment(cfg2);
  CHECK(slurp(r2.metrics_files[1]) == first);

  std::ofstream(dir / "junk.ckpt") << "NOTACHECKPOINT";
  CHECK_THROWS_AS(load_checkpoint((dir / "junk.ckpt").string()), ConfigError);
  fs::remove_all(dir);
  fs::remove_all(dir2);
}
