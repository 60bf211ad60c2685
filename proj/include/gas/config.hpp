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

// Experiment configuration.
//
// Flat text with [sections] and `key = value` lines; `#` starts a comment,
// booleans are true/false and lists are comma-separated. Every key has a
// default that depends only on the task and algorithm, so a file only needs
// the keys it changes. Environment variables named
// GAS_<SECTION>__<KEY> (upper case, e.g. GAS_CONTROL__TOTAL_ENV_STEPS)
// override file values.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gas/curriculum.hpp"
#include "gas/nn.hpp"
#include "gas/trainer.hpp"

namespace gas {

inline constexpr const char* kEnvPrefix = "GAS_";

struct ExperimentConfig {
  std::string name = "gas";
  std::string task = "mountain_car";  // acrobot | mountain_car | microbattle
  // gas | scratch_fixed_level | on_ac | sep_q | max_target | slow_epsilon
  std::string algorithm = "gas";
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "runs";
  bool record_wall_clock = false;
  bool save_checkpoint = true;
  int fixed_level = 2;  // scratch_fixed_level and slow_epsilon only
  int window = 20;      // moving-average window of the aggregate

  curriculum::CurriculumSchedule schedule;
  curriculum::LinearDecay epsilon;
  nn::AdamConfig adam;
  train::ControlTrainerConfig control;
  train::BattleTrainerConfig battle;

  bool is_control() const { return task != "microbattle"; }
  train::Algorithm algorithm_switches() const;

  // Fully configured trainer settings (schedule, epsilon, optimiser and
  // algorithm switches copied in).
  train::ControlTrainerConfig control_trainer() const;
  train::BattleTrainerConfig battle_trainer() const;

  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Published hyperparameter defaults for a task/algorithm.
ExperimentConfig default_config(const std::string& task, const std::string& algorithm);

using EnvOverrides = std::map<std::string, std::string>;  // variable -> value

// Collects GAS_* variables from the process environment.
EnvOverrides environment_overrides();

// `source` names the input in diagnostics ("file:line: ...").
ExperimentConfig parse_config(std::istream& in, const std::string& source = "config",
                              const EnvOverrides& env = {});
ExperimentConfig load_config(const std::string& path, const EnvOverrides& env = {});

// Every key, grouped by section; parse(serialise(c)) == c.
std::string serialise(const ExperimentConfig& config);

// The documented key list as "section.key" strings.
std::vector<std::string> config_keys();

}  // namespace gas
