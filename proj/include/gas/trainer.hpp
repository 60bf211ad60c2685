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

// Off-policy training loops over a growing action space.
//
// Every episode is tagged with the behaviour level l it was collected at.
// Data with tag l trains the value functions of every level l' >= l
// (off-action-space learning); the ON-AC ablation restricts that to l' == l.

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gas/battle.hpp"
#include "gas/control_envs.hpp"
#include "gas/curriculum.hpp"
#include "gas/errors.hpp"
#include "gas/grouping.hpp"
#include "gas/metrics.hpp"
#include "gas/nn.hpp"
#include "gas/value_model.hpp"

namespace gas::train {

using model::Composition;
using model::QValueSet;

enum class TargetMode { kStandard, kMaxLevels };
enum class LevelUpdate { kOffActionSpace, kOnLevelOnly };

using MetricsSink = std::function<void(const MetricsRow&)>;

// Levels whose value functions learn from data tagged `tag`.
std::vector<int> levels_to_update(int tag, int num_levels, LevelUpdate mode);

// Independently per occupied group: a uniform order with probability
// epsilon, the greedy one otherwise. Empty groups get -1.
std::vector<int> epsilon_greedy(const QValueSet& q, int level, double epsilon,
                                std::mt19937_64& rng);

// Value of the next state used in a bootstrap for level `level`: the joint
// value of the per-group greedy profile, either at `level` alone or maxed
// over all levels i <= level.
double bootstrap_value(const QValueSet& next, int level, TargetMode mode);

// r + gamma * bootstrap, or r alone for terminal samples. Throws UsageError
// when level < tag.
double td_target(double reward, bool done, double gamma, const QValueSet& next,
                 int level, int tag, TargetMode mode);

// sum_k gamma^k r_k + gamma^n * bootstrap (bootstrap ignored when terminal).
double nstep_return(std::span<const double> rewards, bool terminal,
                    double gamma, double bootstrap);

// FIFO ring buffer.
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay capacity must be positive");
    items_.reserve(capacity);
  }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[head_] = std::move(item);
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }

  // i-th oldest stored item.
  const T& at(std::size_t i) const { return items_[(head_ + i) % items_.size()]; }

  // Uniform with replacement.
  std::vector<const T*> sample(std::size_t n, std::mt19937_64& rng) const {
    if (items_.empty()) throw UsageError("sample from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<const T*> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[pick(rng)]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::vector<T> items_;
  std::size_t head_ = 0;
};

struct LossDiagnostics {
  double loss = 0.0;               // mean over samples of the summed level terms
  std::vector<double> level_loss;  // per level, summed squared errors / samples
  std::vector<int> level_terms;    // per level, number of squared-error terms
};

// Variant switches shared by both tasks.
struct Algorithm {
  Composition composition = Composition::kComposed;
  TargetMode target = TargetMode::kStandard;
  LevelUpdate level_update = LevelUpdate::kOffActionSpace;
  // Train a single fixed level from scratch instead of growing.
  std::optional<int> fixed_level;
};

// ---------------------------------------------------------------------------
// Discretised control

struct ControlTransition {
  std::vector<float> state;
  int action = 0;
  double reward = 0.0;
  std::vector<float> next_state;
  bool done = false;
  int level = 0;  // behaviour level of the episode (model level index)
};

struct ControlTrainerConfig {
  std::string task = "mountain_car";
  int time_limit = control::kDefaultTimeLimit;
  int max_level = 2;
  Algorithm algorithm;
  curriculum::CurriculumSchedule schedule;  // counts env steps
  curriculum::LinearDecay epsilon{1.0, 0.1, 25000};
  double gamma = 0.99;
  int batch_size = 128;
  int replay_capacity = 10000;
  int target_interval = 200;
  int env_steps_per_update = 4;
  std::int64_t total_env_steps = 150000;
  nn::AdamConfig adam{5e-4, 0.9, 0.999, 1e-4};
  std::vector<int> encoder_widths = {128, 64};
  int refine_width = 64;

  void validate() const;
};

class ControlTrainer {
 public:
  using Model = model::ControlValueModel<float>;

  ControlTrainer(ControlTrainerConfig config, std::uint64_t seed);

  // Trains until total_env_steps, finishing the running episode; one
  // metrics row per episode.
  void run(const MetricsSink& sink);

  int act(std::span<const float> features, int level, double epsilon);

  // Targets for `level` under the current target network.
  std::vector<double> targets(std::span<const ControlTransition* const> batch,
                              int level) const;
  LossDiagnostics train_step(std::span<const ControlTransition* const> batch);

  // Greedy episode at the highest level; returns (return, reached goal).
  std::pair<double, bool> evaluate_episode(std::mt19937_64& rng);

  const ControlTrainerConfig& config() const { return config_; }
  const control::ControlEnv& env() const { return *env_; }
  Model& model() { return model_; }
  const Model& model() const { return model_; }
  const Model& target_model() const { return target_; }
  std::int64_t env_steps() const { return env_steps_; }
  std::int64_t updates() const { return updates_; }
  // Level index reported in metrics for a behaviour level.
  int reported_level(int level) const;

 private:
  ControlTrainerConfig config_;
  std::unique_ptr<control::ControlEnv> env_;
  std::mt19937_64 rng_;
  Model model_;
  Model target_;
  nn::Adam<float> adam_;
  ReplayBuffer<ControlTransition> replay_;
  std::int64_t env_steps_ = 0;
  std::int64_t updates_ = 0;
  std::int64_t episodes_ = 0;
};

// ---------------------------------------------------------------------------
// Microbattle

// Up to n consecutive steps of one episode with one behaviour level.
// actions[t] holds one order per group slot of the behaviour level (-1 for
// empty slots).
struct NStepSegment {
  std::vector<model::BattleObservation> observations;
  std::vector<std::vector<int>> actions;
  std::vector<double> rewards;
  bool terminal = false;  // ends the episode; no bootstrap
  std::optional<model::BattleObservation> bootstrap;
  int level = 0;
};

struct BattleTrainerConfig {
  battle::ScenarioConfig scenario;
  int max_depth = 2;  // GAS(max_depth) grows A_0 .. A_max_depth
  int branching = 2;
  Algorithm algorithm;
  curriculum::CurriculumSchedule schedule{5000, 10000, 2,
                                          curriculum::StepUnit::kModelUpdates};
  curriculum::LinearDecay epsilon{1.0, 0.1, 10000};
  double gamma = 0.99;
  int n_step = 6;
  int batch_segments = 32;
  int queue_capacity = 64;
  int target_interval = 200;
  std::int64_t total_updates = 30000;
  int envs_per_actor = 8;
  int workers = 1;           // 1 = serial and deterministic
  int sync_interval = 10;    // updates between actor model refreshes (workers > 1)
  int eval_every = 10;       // one greedy episode per this many training episodes
  nn::AdamConfig adam{2.5e-4, 0.9, 0.999, 1e-4};
  int unit_embed = 128;
  int hidden = 64;
  int head_hidden = 64;

  void validate() const;
  // Group-tree depth per model level.
  std::vector<int> level_depths() const;
};

// Network input for one state: one-hot group features use the deepest
// model level.
model::BattleObservation make_observation(const battle::BattleState& state,
                                          const grouping::GroupTree& tree,
                                          std::span<const int> level_depths);

// Orders of level `level` expanded to the slots of level `to` (a deeper or
// equal depth), following the positional parent rule.
std::vector<int> expand_actions(std::span<const int> actions, int from_depth,
                                int to_depth, int branching);

class BattleTrainer {
 public:
  using Model = model::BattleValueModel<float>;

  BattleTrainer(BattleTrainerConfig config, std::uint64_t seed);

  // Trains for total_updates model updates; metrics rows for every finished
  // training and evaluation episode.
  void run(const MetricsSink& sink);

  LossDiagnostics train_step(std::span<const NStepSegment* const> batch);

  // Greedy episode at the given level using the online model.
  std::pair<double, bool> evaluate_episode(int level, std::mt19937_64& rng,
                                           std::ostream* trace = nullptr);

  const BattleTrainerConfig& config() const { return config_; }
  Model& model() { return model_; }
  const Model& model() const { return model_; }
  const Model& target_model() const { return target_; }
  std::int64_t updates() const { return updates_; }
  int reported_level(int level) const;

 private:
  class Actor;
  void run_serial(const MetricsSink& sink);
  void run_parallel(const MetricsSink& sink);
  void finish_update();

  BattleTrainerConfig config_;
  std::vector<int> depths_;
  battle::BattleSim sim_;
  std::mt19937_64 rng_;
  Model model_;
  Model target_;
  nn::Adam<float> adam_;
  std::int64_t updates_ = 0;
};

}  // namespace gas::train
