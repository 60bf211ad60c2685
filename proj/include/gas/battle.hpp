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

// Desk-scale two-army battle simulator. Allies receive one order per group;
// enemies follow a scripted defensive policy (hold until an ally enters
// weapon range or they take damage, then attack the closest ally).

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gas/geometry.hpp"

namespace gas::battle {

enum class Team : std::uint8_t { kAlly = 0, kEnemy = 1 };

// Orders 0-7 move, 8-15 attack-move, 16 stop. Direction d points at angle
// d * 45 degrees counter-clockwise from +x.
inline constexpr int kNumDirections = 8;
inline constexpr int kNumOrders = 2 * kNumDirections + 1;
inline constexpr int kStopOrder = 2 * kNumDirections;

enum class OrderKind : std::uint8_t { kMove, kAttackMove, kStop };

OrderKind order_kind(int order);
int order_direction(int order);  // -1 for stop
Vec2 direction_vector(int direction);
std::string order_name(int order);

struct UnitStats {
  double hp = 40.0;
  double damage = 6.0;
  double range = 4.0;
  double speed = 0.5;  // arena units per tick
  int cooldown = 3;    // ticks between shots
};

struct Unit {
  int id = 0;
  Team team = Team::kAlly;
  Vec2 position;
  Vec2 velocity;
  double hp = 0.0;
  double max_hp = 0.0;
  double damage = 0.0;
  double range = 0.0;
  double speed = 0.0;
  int cooldown_remaining = 0;
  int cooldown_duration = 0;
  bool engaged = false;     // enemies only: has left the hold posture
  std::string last_order;   // for traces
};

struct ScenarioConfig {
  int ally_count = 20;
  int enemy_count = 20;
  UnitStats ally_stats;
  UnitStats enemy_stats;
  double arena_width = 64.0;
  double arena_height = 64.0;
  int tick_limit = 400;  // decision steps
  int frame_skip = 4;    // simulation ticks per decision
  double ally_spawn_radius = 9.0;
  double enemy_spawn_radius = 5.0;
  double spawn_gap = 10.0;  // minimum free space between the spawn disks

  // Throws ConfigError describing the first invalid field.
  void validate() const;
};

struct BattleState {
  std::vector<Unit> units;  // alive units sorted by id; allies have the low ids
  int tick = 0;
  int decisions = 0;
  double width = 0.0;
  double height = 0.0;
  double ally_start_hp = 0.0;
  double enemy_start_hp = 0.0;
  int ally_start_count = 0;
  int enemy_start_count = 0;
  Vec2 ally_spawn_center;
  Vec2 enemy_spawn_center;
  double ally_spawn_radius = 0.0;
  double enemy_spawn_radius = 0.0;
  bool done = false;
  bool won = false;

  int count(Team team) const;
  double total_hp(Team team) const;
  const Unit* find(int id) const;
};

struct GroupCommand {
  int group = 0;
  int order = kStopOrder;
};

struct StepResult {
  double reward = 0.0;
  bool done = false;
  bool won = false;
  double damage_term = 0.0;  // normalised enemy hp removed
  double kill_term = 0.0;    // 4 * normalised enemy units killed
  double win_term = 0.0;     // 8 on victory
};

enum class EnemyIntent : std::uint8_t { kHold, kAttack, kApproach };

struct EnemyOrder {
  int unit = 0;
  EnemyIntent intent = EnemyIntent::kHold;
  int target = -1;  // ally id for kAttack / kApproach
};

// Closest ally per engaged enemy (lowest id on exact ties). An enemy counts
// as engaged if its flag is set or any ally is within its weapon range.
std::vector<EnemyOrder> scripted_opponent(const BattleState& state);

class BattleSim {
 public:
  explicit BattleSim(ScenarioConfig config);

  const ScenarioConfig& config() const { return config_; }

  BattleState reset(std::mt19937_64& rng) const;

  // One decision: frame_skip ticks with the given group orders.
  // group_members[g] lists the ally ids of group g. Every non-empty group
  // needs exactly one command; unknown or duplicate groups throw UsageError.
  StepResult step(BattleState& state,
                  const std::vector<std::vector<int>>& group_members,
                  std::span<const GroupCommand> commands) const;

 private:
  void tick(BattleState& state, const std::vector<int>& order_by_id) const;

  ScenarioConfig config_;
};

// Per-unit network features; see feature_width().
//   0-1 position / arena size        2-3 velocity / speed
//   4   hp fraction                  5   cooldown fraction
//   6   team flag (1 ally)           7-8 offset to opposing centroid / size
//   9   nearest opposing distance / arena diagonal
//   10  engaged flag (enemies)       11+ group one-hot (allies)
inline constexpr int kBaseUnitFeatures = 11;
inline int unit_feature_width(int num_groups) {
  return kBaseUnitFeatures + num_groups;
}
std::vector<float> unit_features(const BattleState& state, const Unit& unit,
                                 int group, int num_groups);

// One line per active unit: tick,decision,unit,team,x,y,hp,order
void write_trace(std::ostream& out, const BattleState& state);
void write_trace_header(std::ostream& out);

}  // namespace gas::battle
