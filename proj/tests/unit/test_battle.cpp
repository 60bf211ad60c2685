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
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "gas/battle.hpp"
#include "gas/errors.hpp"

using namespace gas;
using namespace gas::battle;

namespace {

std::vector<std::vector<int>> one_group(const BattleState& s) {
  std::vector<int> ids;
  for (const Unit& u : s.units) {
    if (u.team == Team::kAlly) ids.push_back(u.id);
  }
  return {ids};
}

Unit& unit(BattleState& s, int id) {
  return const_cast<Unit&>(*s.find(id));
}

}  // namespace

TEST_CASE("order encoding") {
  CHECK(order_kind(0) == OrderKind::kMove);
  CHECK(order_kind(8) == OrderKind::kAttackMove);
  CHECK(order_kind(kStopOrder) == OrderKind::kStop);
  CHECK(order_direction(10) == 2);
  CHECK(order_direction(kStopOrder) == -1);
  CHECK(direction_vector(2).y == doctest::Approx(1.0));
  CHECK(order_name(9) == "attack_move:1");
  CHECK_THROWS_AS(order_kind(kNumOrders), LookupError);
}

TEST_CASE("20v20 reset") {
  BattleSim sim{ScenarioConfig{}};
  std::mt19937_64 rng(3);
  const BattleState s = sim.reset(rng);
  CHECK(s.count(Team::kAlly) == 20);
  CHECK(s.count(Team::kEnemy) == 20);
  CHECK(s.ally_start_hp == 20 * 40.0);
  CHECK(s.enemy_start_count == 20);
  for (std::size_t i = 0; i < s.units.size(); ++i) {
    CHECK(s.units[i].id == static_cast<int>(i));
    CHECK(s.units[i].team == (i < 20 ? Team::kAlly : Team::kEnemy));
  }
}

TEST_CASE("spawn regions never overlap") {
  ScenarioConfig c;
  BattleSim sim{c};
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 1000; ++rep) {
    const BattleState s = sim.reset(rng);
    CHECK(distance(s.ally_spawn_center, s.enemy_spawn_center) >=
          c.ally_spawn_radius + c.enemy_spawn_radius + c.spawn_gap);
    double closest = 1e9;
    for (const Unit& a : s.units) {
      CHECK(a.position.x >= 0.0);
      CHECK(a.position.x <= c.arena_width);
      CHECK(a.position.y >= 0.0);
      CHECK(a.position.y <= c.arena_height);
      for (const Unit& e : s.units) {
        if (a.team == Team::kAlly && e.team == Team::kEnemy) {
          closest = std::min(closest, distance(a.position, e.position));
        }
      }
    }
    CHECK(closest >= c.spawn_gap);
  }
}

TEST_CASE("reward: two kills and a tenth of the hp") {
  ScenarioConfig c;
  c.frame_skip = 1;
  c.ally_stats.damage = 40.0;
  BattleSim sim{c};
  std::mt19937_64 rng(1);
  BattleState s = sim.reset(rng);
  for (int j = 0; j < 20; ++j) {
    unit(s, 20 + j).position = {5.0 + 3.0 * (j % 10), 50.0 + 6.0 * (j / 10)};
  }
  for (int i = 0; i < 20; ++i) unit(s, i).position = {40.0 + i, 5.0};
  unit(s, 0).position = {5.0, 49.0};
  unit(s, 1).position = {8.0, 49.0};

  const GroupCommand stop{0, kStopOrder};
  const StepResult r = sim.step(s, one_group(s), std::span(&stop, 1));
  CHECK(r.damage_term == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.kill_term == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(r.reward == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(r.done);
  CHECK(s.count(Team::kEnemy) == 18);
  CHECK(s.find(20) == nullptr);
  CHECK(s.find(21) == nullptr);
}

TEST_CASE("reward: win bonus") {
  ScenarioConfig c;
  c.ally_count = 1;
  c.enemy_count = 1;
  c.ally_stats.damage = 100.0;
  BattleSim sim{c};
  std::mt19937_64 rng(1);
  BattleState s = sim.reset(rng);
  unit(s, 1).position = unit(s, 0).position + Vec2{1.0, 0.0};
  const GroupCommand stop{0, kStopOrder};
  const StepResult r = sim.step(s, one_group(s), std::span(&stop, 1));
  CHECK(r.won);
  CHECK(r.done);
  CHECK(r.win_term == 8.0);
  CHECK(r.reward == doctest::Approx(13.0));
}

TEST_CASE("no contact, no reward; enemies hold") {
  BattleSim sim{ScenarioConfig{}};
  std::mt19937_64 rng(5);
  BattleState s = sim.reset(rng);
  const BattleState start = s;
  const GroupCommand stop{0, kStopOrder};
  for (int t = 0; t < 10; ++t) {
    const StepResult r = sim.step(s, one_group(s), std::span(&stop, 1));
    CHECK(r.reward == 0.0);
  }
  for (std::size_t i = 0; i < s.units.size(); ++i) {
    CHECK(s.units[i].position.x == start.units[i].position.x);
    CHECK(s.units[i].position.y == start.units[i].position.y);
  }
  for (const EnemyOrder& o : scripted_opponent(s)) {
    CHECK(o.intent == EnemyIntent::kHold);
  }
}

TEST_CASE("scripted opponent: attack closest, lowest id on ties") {
  ScenarioConfig c;
  c.ally_count = 3;
  c.enemy_count = 1;
  BattleSim sim{c};
  std::mt19937_64 rng(2);
  BattleState s = sim.reset(rng);
  unit(s, 3).position = {30.0, 30.0};
  unit(s, 0).position = {33.0, 30.0};  // distance 3, in range
  unit(s, 1).position = {30.0, 27.0};  // distance 3, tie with id 0
  unit(s, 2).position = {50.0, 50.0};
  auto orders = scripted_opponent(s);
  REQUIRE(orders.size() == 1);
  CHECK(orders[0].intent == EnemyIntent::kAttack);
  CHECK(orders[0].target == 0);

  // Out of range but engaged: approach the closest ally.
  unit(s, 0).position = {40.0, 30.0};
  unit(s, 1).position = {30.0, 22.0};
  orders = scripted_opponent(s);
  CHECK(orders[0].intent == EnemyIntent::kHold);
  unit(s, 3).engaged = true;
  orders = scripted_opponent(s);
  CHECK(orders[0].intent == EnemyIntent::kApproach);
  CHECK(orders[0].target == 1);
}

TEST_CASE("episode invariants: conservation, monotone hp, determinism") {
  ScenarioConfig c;
  c.ally_stats.damage = 12.0;  // allies win most fights
  BattleSim sim{c};
  std::mt19937_64 order_rng(9);
  std::uniform_int_distribution<int> pick(kNumDirections, kNumOrders - 1);
  int wins = 0;
  for (int episode = 0; episode < 20; ++episode) {
    std::mt19937_64 rng(100 + episode);
    BattleState s = sim.reset(rng);
    std::mt19937_64 twin_rng(100 + episode);
    BattleState twin = sim.reset(twin_rng);
    double total = 0.0;
    double damage = 0.0;
    std::vector<double> hp(c.ally_count + c.enemy_count);
    for (const Unit& u : s.units) hp[u.id] = u.hp;
    // Head every group toward the enemy spawn, then attack-move randomly.
    const Vec2 d = s.enemy_spawn_center - s.ally_spawn_center;
    const int toward =
        static_cast<int>(std::lround(std::atan2(d.y, d.x) / (std::numbers::pi / 4.0)) + 8) % 8;
    while (!s.done) {
      const int order = s.decisions < 30 ? kNumDirections + toward : pick(order_rng);
      const GroupCommand cmd{0, order};
      const auto groups = one_group(s);
      const StepResult r = sim.step(s, groups, std::span(&cmd, 1));
      const StepResult r2 = sim.step(twin, groups, std::span(&cmd, 1));
      CHECK(r.reward == r2.reward);
      REQUIRE(s.units.size() == twin.units.size());
      for (std::size_t i = 0; i < s.units.size(); ++i) {
        CHECK(s.units[i].position.x == twin.units[i].position.x);
        CHECK(s.units[i].hp == twin.units[i].hp);
        CHECK(s.units[i].hp <= hp[s.units[i].id]);
        hp[s.units[i].id] = s.units[i].hp;
      }
      CHECK(r.reward >= 0.0);
      total += r.reward;
      damage += r.damage_term;
    }
    CHECK(s.decisions <= c.tick_limit);
    if (s.won) {
      ++wins;
      CHECK(damage == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(total == doctest::Approx(13.0).epsilon(1e-12));
    } else {
      CHECK(total < 13.0);
    }
  }
  CHECK(wins > 0);
}

TEST_CASE("step errors") {
  BattleSim sim{ScenarioConfig{}};
  std::mt19937_64 rng(1);
  BattleState s = sim.reset(rng);
  const auto groups = one_group(s);
  const GroupCommand unknown{1, kStopOrder};
  CHECK_THROWS_AS(sim.step(s, groups, std::span(&unknown, 1)), UsageError);
  const GroupCommand twice[] = {{0, 0}, {0, 1}};
  CHECK_THROWS_AS(sim.step(s, groups, twice), UsageError);
  CHECK_THROWS_AS(sim.step(s, groups, std::span<const GroupCommand>{}), UsageError);
  const GroupCommand bad{0, kNumOrders};
  CHECK_THROWS_AS(sim.step(s, groups, std::span(&bad, 1)), LookupError);
  ScenarioConfig c;
  c.spawn_gap = 200.0;
  CHECK_THROWS_AS(BattleSim{c}, ConfigError);
}

TEST_CASE("features and trace") {
  BattleSim sim{ScenarioConfig{}};
  std::mt19937_64 rng(4);
  const BattleState s = sim.reset(rng);
  const auto f = unit_features(s, s.units[0], 2, 4);
  REQUIRE(static_cast<int>(f.size()) == unit_feature_width(4));
  CHECK(f[6] == 1.0f);
  CHECK(f[4] == 1.0f);
  CHECK(f[kBaseUnitFeatures + 2] == 1.0f);
  CHECK(f[kBaseUnitFeatures + 1] == 0.0f);
  std::ostringstream out;
  write_trace_header(out);
  write_trace(out, s);
  int lines = 0;
  for (char ch : out.str()) lines += ch == '\n';
  CHECK(lines == 41);
}
