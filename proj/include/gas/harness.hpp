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

// Experiment runner: seeds, metrics files, aggregates and checkpoints.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gas/config.hpp"
#include "gas/nn.hpp"

namespace gas {

struct RunResult {
  std::string config_file;
  std::vector<std::string> metrics_files;  // one per seed
  std::vector<std::string> checkpoints;    // one per seed when enabled
  std::string aggregate_file;
};

// Runs every seed serially. Files land in output_dir:
//   <name>.cfg, <name>_seed<S>.csv, <name>_seed<S>.ckpt, <name>_aggregate.csv
// Progress lines go to `log` when given.
RunResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

// Trains one seed and streams its metrics CSV to `out`.
void train_seed(const ExperimentConfig& config, std::uint64_t seed, std::ostream& out,
                const std::string& checkpoint_path = "");

// Curve kind and aggregate for a task: training return for control tasks,
// evaluation winrate for microbattle.
CurveKind curve_kind(const ExperimentConfig& config);

// Checkpoint: "GASCK1", u32 config length, the serialised config, u32 net
// count, then one GASNN1 block per network.
struct Checkpoint {
  ExperimentConfig config;
  std::vector<nn::DenseNet<float>> networks;
};

void save_checkpoint(const std::string& path, const ExperimentConfig& config,
                     const std::vector<const nn::DenseNet<float>*>& networks);
Checkpoint load_checkpoint(const std::string& path);

struct EvalSummary {
  int episodes = 0;
  double mean_return = 0.0;
  double success_rate = 0.0;
};

// Greedy episodes at the highest level. `trace` receives a per-tick unit
// dump for microbattle checkpoints.
EvalSummary evaluate_checkpoint(const Checkpoint& checkpoint, int episodes,
                                std::uint64_t seed, std::ostream* trace = nullptr);

}  // namespace gas
