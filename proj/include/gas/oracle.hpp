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

// Tabular ground truth over hierarchical action sets: per-level value
// iteration and the jointly-iterated max-over-levels Bellman operator.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gas/action_hierarchy.hpp"

namespace gas::oracle {

inline constexpr double kDefaultTolerance = 1e-10;

struct TabularMDP {
  int num_states = 0;
  ActionHierarchy hierarchy;
  // transition[s][a][s'] over every action of the top level.
  std::vector<std::vector<std::vector<double>>> transition;
  std::vector<std::vector<double>> reward;  // [s][a]
  double gamma = 0.9;

  int num_actions() const { return hierarchy.size(hierarchy.num_levels() - 1); }
  // Throws ConfigError when rows are not distributions (1e-12) or rewards
  // are not finite.
  void validate() const;
};

struct QTable {
  Eigen::MatrixXd q;  // states x |A_level|
  Eigen::VectorXd v;  // max over actions
  std::vector<double> residuals;  // sup-norm change per sweep
};

// Expected next-state value E[V(s') | s, a] for every (s, a) of `level`.
Eigen::MatrixXd expected_next(const TabularMDP& mdp, int level,
                              const Eigen::VectorXd& v);

// One application of the level-restricted Bellman optimality operator.
Eigen::MatrixXd bellman_sweep(const TabularMDP& mdp, int level,
                              const Eigen::MatrixXd& q);

// One joint application of the modified operator to levels 0..qs.size()-1:
// target r + gamma * E[max_{i <= l} max_a' Q_i(s', a')].
std::vector<Eigen::MatrixXd> modified_sweep(const TabularMDP& mdp,
                                            const std::vector<Eigen::MatrixXd>& qs);

// Iterates from Q = 0 until the sup-norm change is below
// tolerance * (1 - gamma) / gamma.
QTable value_iteration(const TabularMDP& mdp, int level,
                       double tolerance = kDefaultTolerance);

std::vector<QTable> modified_value_iteration(const TabularMDP& mdp, int max_level,
                                             double tolerance = kDefaultTolerance);

// Random dynamics (normalised exponential rows, i.e. flat Dirichlet) and
// rewards uniform in [-1, 1]. Every action has independent dynamics.
TabularMDP random_mdp(int num_states, ActionHierarchy hierarchy,
                      std::mt19937_64& rng, double gamma = 0.9);

// Monotonicity and fixed-point checks over random MDPs with 1..max_states
// states and the three-level force-ladder id structure.
struct SuiteReport {
  int mdps = 0;
  double worst_monotonicity_gap = 0.0;  // max over i < j of V_i(s) - V_j(s)
  double worst_fixed_point_error = 0.0;  // sup-norm, modified vs per-level
  double seconds = 0.0;

  bool monotone(double tol = 1e-9) const { return worst_monotonicity_gap <= tol; }
  bool fixed_points_match(double tol = 1e-6) const {
    return worst_fixed_point_error <= tol;
  }
};

SuiteReport run_suite(int num_mdps, std::uint64_t seed, int max_states = 8);

}  // namespace gas::oracle
