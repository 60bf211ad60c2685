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

// Per-level action-value networks over a nested action hierarchy.
//
// A shared encoder feeds one refinement layer per level; each level's
// evaluation head emits a delta over that level's actions (or, for the
// battle model, over orders for every group of that level). Composed mode
// builds level values iteratively,
//
//   Q_0 = base + delta_0,   Q_l(a) = Q_{l-1}(parent(a)) + delta_l(a),
//
// where base is 0 for single-agent control and the state value V for the
// battle model. Separate mode (SEP-Q) uses Q_l = base + delta_l. Composition
// sums run in double so that Q_l - delta_l reproduces the parent value
// exactly for float networks.

#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gas/action_hierarchy.hpp"
#include "gas/nn.hpp"

namespace gas::model {

enum class Composition { kComposed, kSeparate };

// Values for one state. values[l] has one row per group (a single row for
// single-agent control) and one column per action.
struct QValueSet {
  std::vector<Eigen::MatrixXd> values;
  std::vector<Eigen::MatrixXd> deltas;
  std::vector<std::vector<char>> occupied;  // [level][group]
  double state_value = 0.0;
  bool has_state_value = false;

  int num_levels() const { return static_cast<int>(values.size()); }
};

// Mean of the chosen group-action values over occupied groups. actions has
// one entry per group slot; entries for empty groups are ignored. Throws
// UsageError when every group is empty.
double joint_value(const QValueSet& q, int level, std::span<const int> actions);

// Argmax per group (lowest action on ties); -1 for empty groups.
std::vector<int> greedy_actions(const QValueSet& q, int level);

// Joint value of the per-group greedy profile.
double max_joint_value(const QValueSet& q, int level);

template <typename T>
using ModelGradients = std::vector<nn::Gradients<T>>;

struct ControlModelConfig {
  Composition composition = Composition::kComposed;
  int input_width = 0;
  std::vector<int> encoder_widths = {128, 64};
  int refine_width = 64;
  double delta_init_scale = 0.01;
};

// Batched control outputs: values[l] and deltas[l] are B x |A_l|.
struct ControlQBatch {
  std::vector<Eigen::MatrixXd> values;
  std::vector<Eigen::MatrixXd> deltas;

  int batch_size() const { return values.empty() ? 0 : static_cast<int>(values[0].rows()); }
  QValueSet at(int row) const;
};

template <typename T>
class ControlValueModel {
 public:
  ControlValueModel() = default;
  ControlValueModel(ControlModelConfig config, ActionHierarchy hierarchy,
                    std::mt19937_64& rng);

  ControlQBatch forward(const nn::Matrix<T>& states);
  ControlQBatch predict(const nn::Matrix<T>& states) const;

  // grad_values[l] is dL/dQ_l with the shape of values[l].
  ModelGradients<T> backward(std::span<const Eigen::MatrixXd> grad_values);

  std::vector<nn::DenseNet<T>*> networks();
  std::vector<const nn::DenseNet<T>*> networks() const;

  const ControlModelConfig& config() const { return config_; }
  const ActionHierarchy& hierarchy() const { return hierarchy_; }
  int num_levels() const { return hierarchy_.num_levels(); }

  ControlValueModel snapshot() const;

 private:
  template <class Self>
  static ControlQBatch run(Self& self, const nn::Matrix<T>& states);

  ControlQBatch compose(std::vector<Eigen::MatrixXd> deltas) const;

  ControlModelConfig config_;
  ActionHierarchy hierarchy_;
  nn::DenseNet<T> encoder_;
  std::vector<nn::DenseNet<T>> refine_;
  std::vector<nn::DenseNet<T>> evaluate_;
};

struct BattleModelConfig {
  Composition composition = Composition::kComposed;
  std::vector<int> level_depths = {0, 1, 2};  // group-tree depth per level
  int branching = 2;
  int unit_feature_width = 0;
  int unit_embed = 128;
  int hidden = 64;
  int head_hidden = 64;
  int num_orders = 17;
  double delta_init_scale = 0.01;

  int groups_at(int level) const;
};

// Network input for one battle state. Rows are alive units.
struct BattleObservation {
  Eigen::MatrixXf ally_features;
  Eigen::MatrixXf enemy_features;
  std::vector<std::vector<int>> groups;  // [model level][ally row] -> group slot
};

// Set encoder: a per-unit MLP (phi) over ally and enemy features, a second
// per-ally layer (psi) over [phi(unit), mean ally phi, mean enemy phi],
// masked mean pooling of psi for the state and for every group, a
// state-value MLP and one evaluator MLP per level.
template <typename T>
class BattleValueModel {
 public:
  BattleValueModel() = default;
  BattleValueModel(BattleModelConfig config, std::mt19937_64& rng);

  std::vector<QValueSet> forward(std::span<const BattleObservation> batch);
  std::vector<QValueSet> predict(std::span<const BattleObservation> batch) const;

  // grads[i].at(l) is dL/dQ_l for state i (groups x orders).
  ModelGradients<T> backward(std::span<const std::vector<Eigen::MatrixXd>> grads);

  std::vector<nn::DenseNet<T>*> networks();
  std::vector<const nn::DenseNet<T>*> networks() const;

  const BattleModelConfig& config() const { return config_; }
  int num_levels() const { return static_cast<int>(config_.level_depths.size()); }

  BattleValueModel snapshot() const;

 private:
  struct Layout {
    std::vector<int> ally_offset;   // first ally row per state
    std::vector<int> ally_count;
    std::vector<int> enemy_offset;  // first enemy row per state (after allies)
    std::vector<int> enemy_count;
    std::vector<std::vector<int>> group_size;  // [level][state * G + g]
    std::vector<std::vector<int>> ally_group;  // [level][ally row]
    int total_allies = 0;
    int total_enemies = 0;
  };

  template <class Self>
  static std::vector<QValueSet> run(Self& self,
                                    std::span<const BattleObservation> batch);

  int parent_slot(int level, int group) const;

  BattleModelConfig config_;
  nn::DenseNet<T> phi_;
  nn::DenseNet<T> psi_;
  nn::DenseNet<T> value_;
  std::vector<nn::DenseNet<T>> evaluate_;
  Layout layout_;  // layout of the last cached forward
};

extern template class ControlValueModel<float>;
extern template class ControlValueModel<double>;
extern template class BattleValueModel<float>;
extern template class BattleValueModel<double>;

}  // namespace gas::model
