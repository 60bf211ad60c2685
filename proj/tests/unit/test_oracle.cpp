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
#include <random>
#include <vector>

#include <doctest.h>

#include "gas/errors.hpp"
#include "gas/oracle.hpp"

using namespace gas;
using namespace gas::oracle;

namespace {

// Deterministic MDP over the two-level ladder (A_1 has 4 actions).
TabularMDP deterministic(int states, const std::vector<std::vector<int>>& next,
                         const std::vector<std::vector<double>>& reward, double gamma) {
  TabularMDP m;
  m.num_states = states;
  m.hierarchy = ActionHierarchy::force_ladder(1);
  m.gamma = gamma;
  m.reward = reward;
  m.transition.assign(states, std::vector<std::vector<double>>(4, std::vector<double>(states, 0.0)));
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < 4; ++a) m.transition[s][a][next[s][a]] = 1.0;
  }
  return m;
}

}  // namespace

TEST_CASE("single state: V* = r / (1 - gamma)") {
  const auto m = deterministic(1, {{0, 0, 0, 0}}, {{1, 1, 1, 1}}, 0.9);
  for (int l = 0; l <= 1; ++l) {
    const QTable t = value_iteration(m, l);
    CHECK(t.v(0) == doctest::Approx(10.0).epsilon(1e-9));
  }
}

TEST_CASE("two-state chain, by hand") {
  // State 0 moves to the rewarding absorbing state 1 with every action.
  const auto m = deterministic(2, {{1, 1, 1, 1}, {1, 1, 1, 1}}, {{0, 0, 0, 0}, {1, 1, 1, 1}}, 0.9);
  const QTable t = value_iteration(m, 1);
  CHECK(t.v(1) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(t.v(0) == doctest::Approx(9.0).epsilon(1e-9));
}

TEST_CASE("finer levels can only help") {
  // Level-0 actions are a prefix of level 1; only the new action 2 (force
  // 0.5) reaches the rewarding state.
  const auto h = ActionHierarchy::force_ladder(1);
  CHECK(h.payload(1, 2) == 0.5);
  auto m = deterministic(2, {{0, 0, 1, 0}, {1, 1, 1, 1}}, {{0, 0, 0, 0}, {1, 1, 1, 1}}, 0.5);
  const auto per = modified_value_iteration(m, 1);
  CHECK(per[0].v(0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(per[1].v(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(h.size(0) == 2);
}

TEST_CASE("L = 0: modified iteration is plain value iteration") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_mdp(1 + trial % 6, ActionHierarchy::force_ladder(2), rng);
    const auto mod = modified_value_iteration(m, 0);
    const QTable plain = value_iteration(m, 0);
    REQUIRE(mod.size() == 1);
    CHECK((mod[0].q - plain.q).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("a single modified sweep differs from the per-level sweep") {
  const auto m = deterministic(1, {{0, 0, 0, 0}}, {{0, 0, 0, 0}}, 0.9);
  std::vector<Eigen::MatrixXd> qs{Eigen::MatrixXd::Constant(1, 2, 5.0),
                                  Eigen::MatrixXd::Zero(1, 4)};
  const auto mod = modified_sweep(m, qs);
  const auto std1 = bellman_sweep(m, 1, qs[1]);
  CHECK(mod[1](0, 0) == doctest::Approx(4.5));  // bootstraps from the level-0 max
  CHECK(std1(0, 0) == doctest::Approx(0.0));
  CHECK(mod[0](0, 0) == doctest::Approx(4.5));
}

TEST_CASE("random MDPs: stochastic rows, bounded rewards, seed determinism") {
  std::mt19937_64 a(7), b(7);
  const auto m1 = random_mdp(5, ActionHierarchy::force_ladder(2), a);
  const auto m2 = random_mdp(5, ActionHierarchy::force_ladder(2), b);
  CHECK_NOTHROW(m1.validate());
  for (int s = 0; s < 5; ++s) {
    for (int act = 0; act < m1.num_actions(); ++act) {
      double sum = 0.0;
      for (double p : m1.transition[s][act]) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
      CHECK(std::abs(m1.reward[s][act]) <= 1.0);
      CHECK(m1.reward[s][act] == m2.reward[s][act]);
      CHECK(m1.transition[s][act] == m2.transition[s][act]);
    }
  }
  auto bad = m1;
  bad.transition[0][0][0] += 0.01;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("value iteration contracts at rate gamma") {
  std::mt19937_64 rng(3);
  const auto m = random_mdp(6, ActionHierarchy::force_ladder(2), rng, 0.8);
  const QTable t = value_iteration(m, 2);
  REQUIRE(t.residuals.size() > 3);
  for (std::size_t k = 1; k < t.residuals.size(); ++k) {
    CHECK(t.residuals[k] <= 0.8 * t.residuals[k - 1] + 1e-12);
  }
  // Fixed point: one more sweep moves nothing.
  CHECK((bellman_sweep(m, 2, t.q) - t.q).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("suite: monotone values and matching fixed points") {
  const SuiteReport r = run_suite(40, 11, 6);
  CHECK(r.mdps == 40);
  CHECK(r.monotone());
  CHECK(r.fixed_points_match());
  const SuiteReport again = run_suite(40, 11, 6);
  CHECK(again.worst_fixed_point_error == r.worst_fixed_point_error);
}
