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

#include "gas/value_model.hpp"

#include <type_traits>

#include <fmt/format.h>

#include "gas/errors.hpp"

namespace gas::model {

namespace {

template <class Self, class Net, class In>
auto pass(Net& net, const In& input) {
  if constexpr (std::is_const_v<Self>) {
    return net.predict(input);
  } else {
    return net.forward(input);
  }
}

int ipow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void check_level(const QValueSet& q, int level) {
  if (level < 0 || level >= q.num_levels()) {
    throw UsageError(fmt::format("no level {} in value set", level));
  }
}

}  // namespace

double joint_value(const QValueSet& q, int level, std::span<const int> actions) {
  check_level(q, level);
  const auto& v = q.values[level];
  if (static_cast<Eigen::Index>(actions.size()) != v.rows()) {
    throw UsageError("joint_value: one action per group slot required");
  }
  double sum = 0.0;
  int n = 0;
  for (Eigen::Index g = 0; g < v.rows(); ++g) {
    if (!q.occupied[level][g]) continue;
    const int a = actions[g];
    if (a < 0 || a >= v.cols()) {
      throw LookupError(fmt::format("joint_value: bad action {}", a));
    }
    sum += v(g, a);
    ++n;
  }
  if (n == 0) throw UsageError("joint_value: every group is empty");
  return sum / n;
}

std::vector<int> greedy_actions(const QValueSet& q, int level) {
  check_level(q, level);
  const auto& v = q.values[level];
  std::vector<int> out(v.rows(), -1);
  for (Eigen::Index g = 0; g < v.rows(); ++g) {
    if (!q.occupied[level][g]) continue;
    int best = 0;
    for (Eigen::Index a = 1; a < v.cols(); ++a) {
      if (v(g, a) > v(g, best)) best = static_cast<int>(a);
    }
    out[g] = best;
  }
  return out;
}

double max_joint_value(const QValueSet& q, int level) {
  const auto greedy = greedy_actions(q, level);
  return joint_value(q, level, greedy);
}

QValueSet ControlQBatch::at(int row) const {
  QValueSet q;
  for (std::size_t l = 0; l < values.size(); ++l) {
    q.values.push_back(values[l].row(row));
    q.deltas.push_back(deltas[l].row(row));
    q.occupied.push_back({1});
  }
  return q;
}

// ---------------------------------------------------------------------------
// Control model

template <typename T>
ControlValueModel<T>::ControlValueModel(ControlModelConfig config,
                                        ActionHierarchy hierarchy,
                                        std::mt19937_64& rng)
    : config_(std::move(config)), hierarchy_(std::move(hierarchy)) {
  if (config_.input_width <= 0) throw ConfigError("control model: input width");
  if (config_.encoder_widths.empty() || config_.refine_width <= 0) {
    throw ConfigError("control model: widths must be positive");
  }
  std::vector<int> enc{config_.input_width};
  enc.insert(enc.end(), config_.encoder_widths.begin(), config_.encoder_widths.end());
  encoder_ = nn::DenseNet<T>(enc, nn::Activation::kRelu, nn::Activation::kRelu, rng);
  int width = enc.back();
  for (int l = 0; l < hierarchy_.num_levels(); ++l) {
    const int rw[] = {width, config_.refine_width};
    refine_.emplace_back(rw, nn::Activation::kRelu, nn::Activation::kRelu, rng);
    const int ew[] = {config_.refine_width, hierarchy_.size(l)};
    // Q0 is itself the level-0 head here, so only refinements start small.
    evaluate_.emplace_back(ew, nn::Activation::kRelu, nn::Activation::kIdentity,
                           rng, l == 0 ? 1.0 : config_.delta_init_scale);
    width = config_.refine_width;
  }
}

template <typename T>
template <class Self>
ControlQBatch ControlValueModel<T>::run(Self& self, const nn::Matrix<T>& states) {
  nn::Matrix<T> h = pass<Self>(self.encoder_, states);
  std::vector<Eigen::MatrixXd> deltas;
  for (std::size_t l = 0; l < self.refine_.size(); ++l) {
    h = pass<Self>(self.refine_[l], h);
    deltas.push_back(pass<Self>(self.evaluate_[l], h).template cast<double>());
  }
  return self.compose(std::move(deltas));
}

template <typename T>
ControlQBatch ControlValueModel<T>::compose(std::vector<Eigen::MatrixXd> deltas) const {
  ControlQBatch out;
  out.values.push_back(deltas[0]);
  for (int l = 1; l < num_levels(); ++l) {
    const auto& d = deltas[l];
    Eigen::MatrixXd v(d.rows(), d.cols());
    for (Eigen::Index a = 0; a < d.cols(); ++a) {
      if (config_.composition == Composition::kComposed) {
        const int p = hierarchy_.parent_of(l, static_cast<int>(a));
        v.col(a) = out.values[l - 1].col(p) + d.col(a);
      } else {
        v.col(a) = d.col(a);
      }
    }
    out.values.push_back(std::move(v));
  }
  out.deltas = std::move(deltas);
  return out;
}

template <typename T>
ControlQBatch ControlValueModel<T>::forward(const nn::Matrix<T>& states) {
  return run(*this, states);
}

template <typename T>
ControlQBatch ControlValueModel<T>::predict(const nn::Matrix<T>& states) const {
  return run(*this, states);
}

template <typename T>
ModelGradients<T> ControlValueModel<T>::backward(
    std::span<const Eigen::MatrixXd> grad_values) {
  const int n = num_levels();
  if (static_cast<int>(grad_values.size()) != n) {
    throw UsageError("control backward: one gradient per level required");
  }
  std::vector<Eigen::MatrixXd> g(grad_values.begin(), grad_values.end());
  if (config_.composition == Composition::kComposed) {
    for (int l = n - 1; l >= 1; --l) {
      for (Eigen::Index a = 0; a < g[l].cols(); ++a) {
        g[l - 1].col(hierarchy_.parent_of(l, static_cast<int>(a))) += g[l].col(a);
      }
    }
  }
  std::vector<nn::Gradients<T>> eval_grads(n), refine_grads(n);
  nn::Matrix<T> carry;
  for (int l = n - 1; l >= 0; --l) {
    nn::Matrix<T> g_eval_in;
    eval_grads[l] = evaluate_[l].backward(g[l].template cast<T>(), &g_eval_in);
    if (l < n - 1) g_eval_in += carry;
    refine_grads[l] = refine_[l].backward(g_eval_in, &carry);
  }
  ModelGradients<T> out;
  out.push_back(encoder_.backward(carry));
  for (auto& r : refine_grads) out.push_back(std::move(r));
  for (auto& e : eval_grads) out.push_back(std::move(e));
  return out;
}

template <typename T>
std::vector<nn::DenseNet<T>*> ControlValueModel<T>::networks() {
  std::vector<nn::DenseNet<T>*> out{&encoder_};
  for (auto& r : refine_) out.push_back(&r);
  for (auto& e : evaluate_) out.push_back(&e);
  return out;
}

template <typename T>
std::vector<const nn::DenseNet<T>*> ControlValueModel<T>::networks() const {
  std::vector<const nn::DenseNet<T>*> out{&encoder_};
  for (const auto& r : refine_) out.push_back(&r);
  for (const auto& e : evaluate_) out.push_back(&e);
  return out;
}

template <typename T>
ControlValueModel<T> ControlValueModel<T>::snapshot() const {
  ControlValueModel copy = *this;
  for (auto* net : copy.networks()) net->clear_cache();
  return copy;
}

// ---------------------------------------------------------------------------
// Battle model

int BattleModelConfig::groups_at(int level) const {
  return ipow(branching, level_depths.at(level));
}

template <typename T>
BattleValueModel<T>::BattleValueModel(BattleModelConfig config, std::mt19937_64& rng)
    : config_(std::move(config)) {
  const auto& c = config_;
  if (c.level_depths.empty()) throw ConfigError("battle model: no levels");
  for (std::size_t l = 1; l < c.level_depths.size(); ++l) {
    if (c.level_depths[l] <= c.level_depths[l - 1]) {
      throw ConfigError("battle model: level depths must increase");
    }
  }
  if (c.level_depths.front() < 0 || c.branching < 2) {
    throw ConfigError("battle model: bad depth or branching");
  }
  if (c.unit_feature_width <= 0 || c.unit_embed <= 0 || c.hidden <= 0 ||
      c.head_hidden <= 0 || c.num_orders <= 0) {
    throw ConfigError("battle model: widths must be positive");
  }
  const int phi_w[] = {c.unit_feature_width, c.unit_embed};
  phi_ = nn::DenseNet<T>(phi_w, nn::Activation::kRelu, nn::Activation::kRelu, rng);
  const int psi_w[] = {3 * c.unit_embed, c.hidden};
  psi_ = nn::DenseNet<T>(psi_w, nn::Activation::kRelu, nn::Activation::kRelu, rng);
  const int value_w[] = {c.hidden, c.head_hidden, 1};
  value_ = nn::DenseNet<T>(value_w, nn::Activation::kRelu, nn::Activation::kIdentity, rng);
  for (std::size_t l = 0; l < c.level_depths.size(); ++l) {
    const int eval_w[] = {c.hidden, c.head_hidden, c.num_orders};
    evaluate_.emplace_back(eval_w, nn::Activation::kRelu, nn::Activation::kIdentity,
                           rng, c.delta_init_scale);
  }
}

template <typename T>
int BattleValueModel<T>::parent_slot(int level, int group) const {
  const int step = config_.level_depths[level] - config_.level_depths[level - 1];
  return group / ipow(config_.branching, step);
}

template <typename T>
template <class Self>
std::vector<QValueSet> BattleValueModel<T>::run(
    Self& self, std::span<const BattleObservation> batch) {
  const auto& cfg = self.config_;
  const int num_states = static_cast<int>(batch.size());
  const int levels = static_cast<int>(cfg.level_depths.size());
  const int width = cfg.unit_feature_width;
  const int embed = cfg.unit_embed;
  const int hidden = cfg.hidden;
  if (num_states == 0) return {};

  Layout lay;
  lay.group_size.resize(levels);
  lay.ally_group.resize(levels);
  for (int s = 0; s < num_states; ++s) {
    const auto& obs = batch[s];
    const int na = static_cast<int>(obs.ally_features.rows());
    const int ne = static_cast<int>(obs.enemy_features.rows());
    if (na == 0) throw UsageError("battle forward: state without allied units");
    if (obs.ally_features.cols() != width ||
        (ne > 0 && obs.enemy_features.cols() != width)) {
      throw ConfigError(fmt::format("battle forward: feature width must be {}", width));
    }
    if (static_cast<int>(obs.groups.size()) != levels) {
      throw UsageError("battle forward: group assignment per level required");
    }
    lay.ally_offset.push_back(lay.total_allies);
    lay.ally_count.push_back(na);
    lay.enemy_count.push_back(ne);
    lay.total_allies += na;
    lay.total_enemies += ne;
  }
  {
    int off = lay.total_allies;
    for (int s = 0; s < num_states; ++s) {
      lay.enemy_offset.push_back(off);
      off += lay.enemy_count[s];
    }
  }
  for (int l = 0; l < levels; ++l) {
    const int groups = cfg.groups_at(l);
    lay.group_size[l].assign(static_cast<std::size_t>(num_states) * groups, 0);
    lay.ally_group[l].resize(lay.total_allies);
    for (int s = 0; s < num_states; ++s) {
      const auto& assign = batch[s].groups[l];
      if (static_cast<int>(assign.size()) != lay.ally_count[s]) {
        throw UsageError("battle forward: one group per ally required");
      }
      for (int i = 0; i < lay.ally_count[s]; ++i) {
        const int g = assign[i];
        if (g < 0 || g >= groups) {
          throw LookupError(fmt::format("battle forward: group {} at level {}", g, l));
        }
        lay.ally_group[l][lay.ally_offset[s] + i] = g;
        ++lay.group_size[l][s * groups + g];
      }
    }
  }

  nn::Matrix<T> units(lay.total_allies + lay.total_enemies, width);
  for (int s = 0; s < num_states; ++s) {
    units.middleRows(lay.ally_offset[s], lay.ally_count[s]) =
        batch[s].ally_features.template cast<T>();
    if (lay.enemy_count[s] > 0) {
      units.middleRows(lay.enemy_offset[s], lay.enemy_count[s]) =
          batch[s].enemy_features.template cast<T>();
    }
  }
  const nn::Matrix<T> phi = pass<Self>(self.phi_, units);

  nn::Matrix<T> psi_in(lay.total_allies, 3 * embed);
  for (int s = 0; s < num_states; ++s) {
    const int na = lay.ally_count[s];
    const int ne = lay.enemy_count[s];
    const Eigen::RowVectorXd ally_mean =
        phi.middleRows(lay.ally_offset[s], na).template cast<double>().colwise().sum() /
        static_cast<double>(na);
    Eigen::RowVectorXd enemy_mean = Eigen::RowVectorXd::Zero(embed);
    if (ne > 0) {
      enemy_mean = phi.middleRows(lay.enemy_offset[s], ne)
                       .template cast<double>()
                       .colwise()
                       .sum() /
                   static_cast<double>(ne);
    }
    auto rows = psi_in.middleRows(lay.ally_offset[s], na);
    rows.leftCols(embed) = phi.middleRows(lay.ally_offset[s], na);
    rows.middleCols(embed, embed).rowwise() = ally_mean.template cast<T>();
    rows.rightCols(embed).rowwise() = enemy_mean.template cast<T>();
  }
  const nn::Matrix<T> psi = pass<Self>(self.psi_, psi_in);

  nn::Matrix<T> state_embed(num_states, hidden);
  for (int s = 0; s < num_states; ++s) {
    state_embed.row(s) = (psi.middleRows(lay.ally_offset[s], lay.ally_count[s])
                              .template cast<double>()
                              .colwise()
                              .sum() /
                          static_cast<double>(lay.ally_count[s]))
                             .template cast<T>();
  }
  const nn::Matrix<T> value = pass<Self>(self.value_, state_embed);

  std::vector<Eigen::MatrixXd> deltas(levels);
  for (int l = 0; l < levels; ++l) {
    const int groups = cfg.groups_at(l);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(num_states * groups, hidden);
    for (int s = 0; s < num_states; ++s) {
      for (int i = 0; i < lay.ally_count[s]; ++i) {
        const int r = lay.ally_offset[s] + i;
        sums.row(s * groups + lay.ally_group[l][r]) += psi.row(r).template cast<double>();
      }
    }
    for (int row = 0; row < sums.rows(); ++row) {
      const int n = lay.group_size[l][row];
      if (n > 0) sums.row(row) /= static_cast<double>(n);
    }
    deltas[l] = pass<Self>(self.evaluate_[l], nn::Matrix<T>(sums.template cast<T>()))
                    .template cast<double>();
  }

  std::vector<QValueSet> out(num_states);
  for (int s = 0; s < num_states; ++s) {
    QValueSet& q = out[s];
    q.state_value = static_cast<double>(value(s, 0));
    q.has_state_value = true;
    for (int l = 0; l < levels; ++l) {
      const int groups = cfg.groups_at(l);
      q.deltas.push_back(deltas[l].middleRows(s * groups, groups));
      std::vector<char> occ(groups);
      for (int g = 0; g < groups; ++g) occ[g] = lay.group_size[l][s * groups + g] > 0;
      q.occupied.push_back(std::move(occ));
      const auto& d = q.deltas.back();
      Eigen::MatrixXd v(groups, cfg.num_orders);
      for (int g = 0; g < groups; ++g) {
        if (l == 0 || cfg.composition == Composition::kSeparate) {
          v.row(g) = d.row(g).array() + q.state_value;
        } else {
          v.row(g) = q.values[l - 1].row(self.parent_slot(l, g)) + d.row(g);
        }
      }
      q.values.push_back(std::move(v));
    }
  }
  if constexpr (!std::is_const_v<Self>) self.layout_ = std::move(lay);
  return out;
}

template <typename T>
std::vector<QValueSet> BattleValueModel<T>::forward(
    std::span<const BattleObservation> batch) {
  return run(*this, batch);
}

template <typename T>
std::vector<QValueSet> BattleValueModel<T>::predict(
    std::span<const BattleObservation> batch) const {
  return run(*this, batch);
}

template <typename T>
ModelGradients<T> BattleValueModel<T>::backward(
    std::span<const std::vector<Eigen::MatrixXd>> grads) {
  if (!phi_.has_cache()) throw UsageError("backward() without a cached forward()");
  const Layout& lay = layout_;
  const int num_states = static_cast<int>(lay.ally_count.size());
  const int levels = num_levels();
  const int embed = config_.unit_embed;
  const int hidden = config_.hidden;
  if (static_cast<int>(grads.size()) != num_states) {
    throw UsageError("battle backward: one gradient per state required");
  }

  nn::Matrix<T> g_value(num_states, 1);
  std::vector<nn::Matrix<T>> g_delta(levels);
  for (int l = 0; l < levels; ++l) {
    g_delta[l].resize(num_states * config_.groups_at(l), config_.num_orders);
  }
  for (int s = 0; s < num_states; ++s) {
    if (static_cast<int>(grads[s].size()) != levels) {
      throw UsageError("battle backward: one gradient per level required");
    }
    std::vector<Eigen::MatrixXd> g(grads[s].begin(), grads[s].end());
    double gv = 0.0;
    if (config_.composition == Composition::kComposed) {
      for (int l = levels - 1; l >= 1; --l) {
        for (int grp = 0; grp < g[l].rows(); ++grp) {
          g[l - 1].row(parent_slot(l, grp)) += g[l].row(grp);
        }
      }
      gv = g[0].sum();
    } else {
      for (int l = 0; l < levels; ++l) gv += g[l].sum();
    }
    g_value(s, 0) = static_cast<T>(gv);
    for (int l = 0; l < levels; ++l) {
      const int groups = config_.groups_at(l);
      g_delta[l].middleRows(s * groups, groups) = g[l].template cast<T>();
    }
  }

  nn::Matrix<T> g_state;
  auto value_grads = value_.backward(g_value, &g_state);
  std::vector<nn::Matrix<T>> g_group(levels);
  std::vector<nn::Gradients<T>> eval_grads(levels);
  for (int l = 0; l < levels; ++l) {
    eval_grads[l] = evaluate_[l].backward(g_delta[l], &g_group[l]);
  }

  nn::Matrix<T> g_psi(lay.total_allies, hidden);
  for (int s = 0; s < num_states; ++s) {
    const int na = lay.ally_count[s];
    for (int i = 0; i < na; ++i) {
      const int r = lay.ally_offset[s] + i;
      Eigen::Matrix<double, 1, Eigen::Dynamic> acc =
          g_state.row(s).template cast<double>() / static_cast<double>(na);
      for (int l = 0; l < levels; ++l) {
        const int slot = s * config_.groups_at(l) + lay.ally_group[l][r];
        acc += g_group[l].row(slot).template cast<double>() /
               static_cast<double>(lay.group_size[l][slot]);
      }
      g_psi.row(r) = acc.template cast<T>();
    }
  }
  nn::Matrix<T> g_psi_in;
  auto psi_grads = psi_.backward(g_psi, &g_psi_in);

  nn::Matrix<T> g_phi = nn::Matrix<T>::Zero(lay.total_allies + lay.total_enemies, embed);
  g_phi.topRows(lay.total_allies) = g_psi_in.leftCols(embed);
  for (int s = 0; s < num_states; ++s) {
    const int na = lay.ally_count[s];
    const int ne = lay.enemy_count[s];
    const auto block = g_psi_in.middleRows(lay.ally_offset[s], na);
    const Eigen::RowVectorXd g_ally_mean =
        block.middleCols(embed, embed).template cast<double>().colwise().sum() /
        static_cast<double>(na);
    g_phi.middleRows(lay.ally_offset[s], na).rowwise() +=
        g_ally_mean.template cast<T>();
    if (ne > 0) {
      const Eigen::RowVectorXd g_enemy_mean =
          block.rightCols(embed).template cast<double>().colwise().sum() /
          static_cast<double>(ne);
      g_phi.middleRows(lay.enemy_offset[s], ne).rowwise() +=
          g_enemy_mean.template cast<T>();
    }
  }
  auto phi_grads = phi_.backward(g_phi);

  ModelGradients<T> out;
  out.push_back(std::move(phi_grads));
  out.push_back(std::move(psi_grads));
  out.push_back(std::move(value_grads));
  for (auto& e : eval_grads) out.push_back(std::move(e));
  return out;
}

template <typename T>
std::vector<nn::DenseNet<T>*> BattleValueModel<T>::networks() {
  std::vector<nn::DenseNet<T>*> out{&phi_, &psi_, &value_};
  for (auto& e : evaluate_) out.push_back(&e);
  return out;
}

template <typename T>
std::vector<const nn::DenseNet<T>*> BattleValueModel<T>::networks() const {
  std::vector<const nn::DenseNet<T>*> out{&phi_, &psi_, &value_};
  for (const auto& e : evaluate_) out.push_back(&e);
  return out;
}

template <typename T>
BattleValueModel<T> BattleValueModel<T>::snapshot() const {
  BattleValueModel copy = *this;
  for (auto* net : copy.networks()) net->clear_cache();
  copy.layout_ = {};
  return copy;
}

template class ControlValueModel<float>;
template class ControlValueModel<double>;
template class BattleValueModel<float>;
template class BattleValueModel<double>;

}  // namespace gas::model
