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

// Command-line front end: train, plot, oracle-check, eval, hierarchy.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gas/action_hierarchy.hpp"
#include "gas/config.hpp"
#include "gas/errors.hpp"
#include "gas/harness.hpp"
#include "gas/metrics.hpp"
#include "gas/oracle.hpp"
#include "gas/plot.hpp"

namespace {

int train(const std::string& config_path, const std::vector<std::uint64_t>& seeds,
          const std::string& out_dir) {
  auto config = gas::load_config(config_path, gas::environment_overrides());
  if (!seeds.empty()) config.seeds = seeds;
  if (!out_dir.empty()) config.output_dir = out_dir;
  config.validate();
  const auto result = gas::run_experiment(config, &std::cerr);
  std::cout << result.aggregate_file << "\n";
  return 0;
}

int plot(const std::string& out_path, const std::vector<std::string>& inputs,
         const std::string& x, const std::string& title) {
  std::vector<gas::Curve> curves;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw gas::ConfigError(fmt::format("cannot open aggregate '{}'", path));
    curves.push_back({gas::curve_label(path), gas::read_aggregate(in)});
  }
  gas::PlotOptions opt;
  opt.title = title;
  if (x == "index") {
    opt.x = gas::XColumn::kIndex;
  } else if (x == "env_steps") {
    opt.x = gas::XColumn::kEnvSteps;
  } else if (x == "model_updates") {
    opt.x = gas::XColumn::kModelUpdates;
  } else if (x == "auto") {
    // Winrate curves are plotted against model updates.
    opt.x = !curves.empty() && curves.front().aggregate.y_name == "winrate"
                ? gas::XColumn::kModelUpdates
                : gas::XColumn::kIndex;
  } else {
    throw gas::UsageError(fmt::format("unknown x axis '{}'", x));
  }
  const auto svg = gas::render_svg(curves, opt);
  std::ofstream out(out_path);
  if (!out) throw gas::ConfigError(fmt::format("cannot write '{}'", out_path));
  out << svg;
  return 0;
}

int oracle_check(int mdps, std::uint64_t seed) {
  const auto r = gas::oracle::run_suite(mdps, seed);
  const bool mono = r.monotone();
  const bool fixed = r.fixed_points_match();
  std::cout << fmt::format("[{}] monotonicity: {} MDPs, worst V_i - V_j = {:.3e} (tol 1e-9)\n",
                           mono ? "PASS" : "FAIL", r.mdps, r.worst_monotonicity_gap);
  std::cout << fmt::format("[{}] modified fixed point: worst sup-norm error {:.3e} (tol 1e-6)\n",
                           fixed ? "PASS" : "FAIL", r.worst_fixed_point_error);
  std::cout << fmt::format("{:.2f} s\n", r.seconds);
  return mono && fixed ? 0 : 1;
}

int eval(const std::string& checkpoint, int episodes, std::uint64_t seed,
         const std::string& trace_path) {
  const auto ck = gas::load_checkpoint(checkpoint);
  std::ofstream trace;
  if (!trace_path.empty()) {
    if (ck.config.is_control()) throw gas::UsageError("--trace needs a microbattle checkpoint");
    trace.open(trace_path);
    if (!trace) throw gas::ConfigError(fmt::format("cannot write '{}'", trace_path));
  }
  const auto s = gas::evaluate_checkpoint(ck, episodes, seed,
                                          trace_path.empty() ? nullptr : &trace);
  std::cout << fmt::format("episodes={} mean_return={} success_rate={}\n", s.episodes,
                           s.mean_return, s.success_rate);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curriculum learning with growing action spaces"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::uint64_t> seeds;
  auto* train_cmd = app.add_subcommand("train", "Train every seed of a config");
  train_cmd->add_option("--config", config_path, "Config file")->required();
  train_cmd->add_option("--seed", seeds, "Seed(s) replacing experiment.seeds");
  train_cmd->add_option("--out", out_dir, "Output directory");

  std::string plot_out, x_axis = "auto", title;
  std::vector<std::string> aggregates;
  auto* plot_cmd = app.add_subcommand("plot", "Render aggregate files as an SVG");
  plot_cmd->add_option("--out", plot_out, "SVG file")->required();
  plot_cmd->add_option("--x", x_axis, "index | env_steps | model_updates | auto");
  plot_cmd->add_option("--title", title, "Plot title");
  plot_cmd->add_option("aggregates", aggregates, "Aggregate CSV files")->required();

  int mdps = 100;
  std::uint64_t oracle_seed = 0;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Tabular monotonicity and fixed-point suite");
  oracle_cmd->add_option("--mdps", mdps, "Number of random MDPs")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--seed", oracle_seed, "Generator seed");

  std::string checkpoint, trace_path;
  int episodes = 10;
  std::uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--episodes", episodes, "Episodes")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval_seed, "Environment seed");
  eval_cmd->add_option("--trace", trace_path, "Unit trace of the first episode (microbattle)");

  int levels = 2;
  auto* hier_cmd = app.add_subcommand("hierarchy", "Print the force-ladder hierarchy");
  hier_cmd->add_option("--max-level", levels, "Highest level")->check(CLI::Range(0, 8));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return train(config_path, seeds, out_dir);
    if (*plot_cmd) return plot(plot_out, aggregates, x_axis, title);
    if (*oracle_cmd) return oracle_check(mdps, oracle_seed);
    if (*eval_cmd) return eval(checkpoint, episodes, eval_seed, trace_path);
    if (*hier_cmd) {
      std::cout << gas::ActionHierarchy::force_ladder(levels).dump();
      return 0;
    }
  } catch (const gas::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
