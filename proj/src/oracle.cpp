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

#include "gas/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gas/errors.hpp"

namespace gas::oracle {

namespace {

constexpr int kMaxSweeps = 1000000;

double sup_change(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

void TabularMDP::validate() const {
  if (num_states < 1) throw ConfigError("mdp: needs at least one state");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("mdp: gamma must be in (0, 1)");
  const int na = num_actions();
  if (static_cast<int>(transition.size()) != num_states ||
      static_cast<int>(reward.size()) != num_states) {
    throw ConfigError("mdp: tables must have one entry per state");
  }
  for (int s = 0; s < num_states; ++s) {
    if (static_cast<int>(transition[s].size()) != na ||
        static_cast<int>(reward[s].size()) != na) {
      throw ConfigError(fmt::format("mdp: state {} needs {} actions", s, na));
    }
    for (int a = 0; a < na; ++a) {
      const auto& row = transition[s][a];
      if (static_cast<int>(row.size()) != num_states) {
        throw ConfigError("mdp: transition row has the wrong width");
      }
      double sum = 0.0;
      for (double p : row) {
        if (!(p >= 0.0)) throw ConfigError("mdp: negative probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        throw ConfigError(fmt::format("mdp: P[{}][{}] sums to {}", s, a, sum));
      }
      if (!std::isfinite(reward[s][a])) throw ConfigError("mdp: non-finite reward");
    }
  }
}

Eigen::MatrixXd expected_next(const TabularMDP& mdp, int level,
                              const Eigen::VectorXd& v) {
  const int na = mdp.hierarchy.size(level);
  Eigen::MatrixXd out(mdp.num_states, na);
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < na; ++a) {
      double e = 0.0;
      const auto& row = mdp.transition[s][a];
      for (int n = 0; n < mdp.num_states; ++n) e += row[n] * v(n);
      out(s, a) = e;
    }
  }
  return out;
}

Eigen::MatrixXd bellman_sweep(const TabularMDP& mdp, int level,
                              const Eigen::MatrixXd& q) {
  const Eigen::VectorXd v = q.rowwise().maxCoeff();
  Eigen::MatrixXd next = expected_next(mdp, level, v) * mdp.gamma;
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < next.cols(); ++a) next(s, a) += mdp.reward[s][a];
  }
  return next;
}

std::vector<Eigen::MatrixXd> modified_sweep(const TabularMDP& mdp,
                                            const std::vector<Eigen::MatrixXd>& qs) {
  std::vector<Eigen::MatrixXd> out;
  Eigen::VectorXd running = Eigen::VectorXd::Constant(
      mdp.num_states, -std::numeric_limits<double>::infinity());
  for (std::size_t l = 0; l < qs.size(); ++l) {
    running = running.cwiseMax(qs[l].rowwise().maxCoeff());
    Eigen::MatrixXd next = expected_next(mdp, static_cast<int>(l), running) * mdp.gamma;
    for (int s = 0; s < mdp.num_states; ++s) {
      for (int a = 0; a < next.cols(); ++a) next(s, a) += mdp.reward[s][a];
    }
    out.push_back(std::move(next));
  }
  return out;
}

QTable value_iteration(const TabularMDP& mdp, int level, double tolerance) {
  if (!(tolerance > 0.0)) throw ConfigError("value_iteration: tolerance must be > 0");
  const double stop = tolerance * (1.0 - mdp.gamma) / mdp.gamma;
  QTable t;
  t.q = Eigen::MatrixXd::Zero(mdp.num_states, mdp.hierarchy.size(level));
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    Eigen::MatrixXd next = bellman_sweep(mdp, level, t.q);
    const double change = sup_change(next, t.q);
    t.residuals.push_back(change);
    t.q = std::move(next);
    if (change < stop) break;
  }
  t.v = t.q.rowwise().maxCoeff();
  return t;
}

std::vector<QTable> modified_value_iteration(const TabularMDP& mdp, int max_level,
                                             double tolerance) {
  if (!(tolerance > 0.0)) throw ConfigError("value_iteration: tolerance must be > 0");
  if (max_level < 0 || max_level >= mdp.hierarchy.num_levels()) {
    throw LookupError(fmt::format("no level {}", max_level));
  }
  const double stop = tolerance * (1.0 - mdp.gamma) / mdp.gamma;
  std::vector<Eigen::MatrixXd> qs;
  for (int l = 0; l <= max_level; ++l) {
    qs.push_back(Eigen::MatrixXd::Zero(mdp.num_states, mdp.hierarchy.size(l)));
  }
  std::vector<double> residuals;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    auto next = modified_sweep(mdp, qs);
    double change = 0.0;
    for (std::size_t l = 0; l < qs.size(); ++l) {
      change = std::max(change, sup_change(next[l], qs[l]));
    }
    residuals.push_back(change);
    qs = std::move(next);
    if (change < stop) break;
  }
  std::vector<QTable> out;
  for (auto& q : qs) {
    QTable t;
    t.v = q.rowwise().maxCoeff();
    t.q = std::move(q);
    t.residuals = residuals;
    out.push_back(std::move(t));
  }
  return out;
}

TabularMDP random_mdp(int num_states, ActionHierarchy hierarchy,
                      std::mt19937_64& rng, double gamma) {
  if (num_states < 1) throw ConfigError("random_mdp: needs at least one state");
  TabularMDP mdp;
  mdp.num_states = num_states;
  mdp.hierarchy = std::move(hierarchy);
  mdp.gamma = gamma;
  const int na = mdp.num_actions();
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> rew(-1.0, 1.0);
  mdp.transition.assign(num_states, std::vector<std::vector<double>>(na));
  mdp.reward.assign(num_states, std::vector<double>(na));
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < na; ++a) {
      auto& row = mdp.transition[s][a];
      row.resize(num_states);
      double sum = 0.0;
      for (auto& p : row) {
        p = expo(rng);
        sum += p;
      }
      for (auto& p : row) p /= sum;
      mdp.reward[s][a] = rew(rng);
    }
  }
  mdp.validate();
  return mdp;
}

SuiteReport run_suite(int num_mdps, std::uint64_t seed, int max_states) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> states(1, max_states);
  const auto ladder = ActionHierarchy::force_ladder(2);
  SuiteReport r;
  r.worst_monotonicity_gap = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < num_mdps; ++m) {
    const auto mdp = random_mdp(states(rng), ladder, rng);
    std::vector<QTable> tables;
    for (int l = 0; l < 3; ++l) tables.push_back(value_iteration(mdp, l));
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        r.worst_monotonicity_gap =
            std::max(r.worst_monotonicity_gap, (tables[i].v - tables[j].v).maxCoeff());
      }
    }
    const auto joint = modified_value_iteration(mdp, 2);
    for (int l = 0; l < 3; ++l) {
      r.worst_fixed_point_error = std::max(
          r.worst_fixed_point_error, (joint[l].q - tables[l].q).cwiseAbs().maxCoeff());
    }
    ++r.mdps;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace gas::oracle
