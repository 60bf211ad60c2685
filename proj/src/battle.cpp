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

#include "gas/battle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "gas/errors.hpp"

namespace gas::battle {

namespace {

Vec2 random_in_disk(std::mt19937_64& rng, Vec2 center, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::sqrt(u(rng));
  const double a = 2.0 * std::numbers::pi * u(rng);
  return {center.x + r * std::cos(a), center.y + r * std::sin(a)};
}

Vec2 clamp_to_arena(Vec2 p, double w, double h) {
  return {std::clamp(p.x, 0.0, w), std::clamp(p.y, 0.0, h)};
}

Unit make_unit(int id, Team team, Vec2 pos, const UnitStats& s) {
  Unit u;
  u.id = id;
  u.team = team;
  u.position = pos;
  u.hp = s.hp;
  u.max_hp = s.hp;
  u.damage = s.damage;
  u.range = s.range;
  u.speed = s.speed;
  u.cooldown_duration = s.cooldown;
  return u;
}

// Index of the closest unit of `team` to `from`, optionally within `range`.
// Lowest id wins exact ties (units are sorted by id).
int closest(const BattleState& state, Vec2 from, Team team, double range) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  const double r2 = range * range;
  for (int i = 0; i < static_cast<int>(state.units.size()); ++i) {
    const Unit& u = state.units[i];
    if (u.team != team) continue;
    const double d = distance_squared(from, u.position);
    if (d <= r2 && d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Vec2 step_toward(Vec2 from, Vec2 to, double max_step) {
  const Vec2 delta = to - from;
  const double d = delta.norm();
  if (d <= max_step || d == 0.0) return delta;
  return delta * (max_step / d);
}

}  // namespace

OrderKind order_kind(int order) {
  if (order < 0 || order >= kNumOrders) {
    throw LookupError(fmt::format("unknown order {}", order));
  }
  if (order == kStopOrder) return OrderKind::kStop;
  return order < kNumDirections ? OrderKind::kMove : OrderKind::kAttackMove;
}

int order_direction(int order) {
  if (order_kind(order) == OrderKind::kStop) return -1;
  return order % kNumDirections;
}

Vec2 direction_vector(int direction) {
  const double a = direction * std::numbers::pi / 4.0;
  return {std::cos(a), std::sin(a)};
}

std::string order_name(int order) {
  switch (order_kind(order)) {
    case OrderKind::kMove:
      return fmt::format("move:{}", order_direction(order));
    case OrderKind::kAttackMove:
      return fmt::format("attack_move:{}", order_direction(order));
    case OrderKind::kStop:
      break;
  }
  return "stop";
}

void ScenarioConfig::validate() const {
  if (ally_count <= 0) throw ConfigError("scenario: ally_count must be > 0");
  if (enemy_count <= 0) throw ConfigError("scenario: enemy_count must be > 0");
  for (const UnitStats* s : {&ally_stats, &enemy_stats}) {
    if (!(s->hp > 0) || !(s->damage > 0) || !(s->range > 0) ||
        !(s->speed >= 0) || s->cooldown < 1) {
      throw ConfigError("scenario: unit stats must be positive");
    }
  }
  if (!(arena_width > 0) || !(arena_height > 0)) {
    throw ConfigError("scenario: arena must have positive size");
  }
  if (tick_limit <= 0 || frame_skip <= 0) {
    throw ConfigError("scenario: tick_limit and frame_skip must be > 0");
  }
  if (!(ally_spawn_radius >= 0) || !(enemy_spawn_radius >= 0) ||
      !(spawn_gap > 0)) {
    throw ConfigError("scenario: bad spawn geometry");
  }
  const double need = 2.0 * (ally_spawn_radius + enemy_spawn_radius) + spawn_gap;
  if (need > std::min(arena_width, arena_height) * std::numbers::sqrt2) {
    throw ConfigError("scenario: spawn regions do not fit in the arena");
  }
}

int BattleState::count(Team team) const {
  return static_cast<int>(std::count_if(
      units.begin(), units.end(), [team](const Unit& u) { return u.team == team; }));
}

double BattleState::total_hp(Team team) const {
  double sum = 0.0;
  for (const auto& u : units) {
    if (u.team == team) sum += u.hp;
  }
  return sum;
}

const Unit* BattleState::find(int id) const {
  const auto it = std::lower_bound(
      units.begin(), units.end(), id,
      [](const Unit& u, int v) { return u.id < v; });
  return (it != units.end() && it->id == id) ? &*it : nullptr;
}

std::vector<EnemyOrder> scripted_opponent(const BattleState& state) {
  std::vector<EnemyOrder> orders;
  for (const Unit& e : state.units) {
    if (e.team != Team::kEnemy) continue;
    EnemyOrder o;
    o.unit = e.id;
    const int in_range = closest(state, e.position, Team::kAlly, e.range);
    if (!e.engaged && in_range < 0) {
      orders.push_back(o);
      continue;
    }
    const int target =
        closest(state, e.position, Team::kAlly, std::numeric_limits<double>::infinity());
    if (target < 0) {
      orders.push_back(o);
      continue;
    }
    o.target = state.units[target].id;
    const double d = distance(e.position, state.units[target].position);
    o.intent = d <= e.range ? EnemyIntent::kAttack : EnemyIntent::kApproach;
    orders.push_back(o);
  }
  return orders;
}

BattleSim::BattleSim(ScenarioConfig config) : config_(std::move(config)) {
  config_.validate();
}

BattleState BattleSim::reset(std::mt19937_64& rng) const {
  const auto& c = config_;
  BattleState s;
  s.width = c.arena_width;
  s.height = c.arena_height;
  s.ally_spawn_radius = c.ally_spawn_radius;
  s.enemy_spawn_radius = c.enemy_spawn_radius;

  auto sample_center = [&](double r) {
    std::uniform_real_distribution<double> ux(r, c.arena_width - r);
    std::uniform_real_distribution<double> uy(r, c.arena_height - r);
    return Vec2{ux(rng), uy(rng)};
  };
  const double min_gap = c.ally_spawn_radius + c.enemy_spawn_radius + c.spawn_gap;
  for (int attempt = 0;; ++attempt) {
    s.enemy_spawn_center = sample_center(c.enemy_spawn_radius);
    s.ally_spawn_center = sample_center(c.ally_spawn_radius);
    if (distance(s.enemy_spawn_center, s.ally_spawn_center) >= min_gap) break;
    if (attempt > 100000) throw ConfigError("scenario: cannot place spawns");
  }

  int id = 0;
  for (int i = 0; i < c.ally_count; ++i) {
    s.units.push_back(make_unit(
        id++, Team::kAlly,
        random_in_disk(rng, s.ally_spawn_center, c.ally_spawn_radius),
        c.ally_stats));
  }
  for (int i = 0; i < c.enemy_count; ++i) {
    s.units.push_back(make_unit(
        id++, Team::kEnemy,
        random_in_disk(rng, s.enemy_spawn_center, c.enemy_spawn_radius),
        c.enemy_stats));
  }
  s.ally_start_hp = s.total_hp(Team::kAlly);
  s.enemy_start_hp = s.total_hp(Team::kEnemy);
  s.ally_start_count = c.ally_count;
  s.enemy_start_count = c.enemy_count;
  return s;
}

StepResult BattleSim::step(BattleState& state,
                           const std::vector<std::vector<int>>& group_members,
                           std::span<const GroupCommand> commands) const {
  if (state.done) throw UsageError("battle step() after the episode ended");

  const int num_groups = static_cast<int>(group_members.size());
  std::vector<int> group_order(num_groups, -1);
  for (const auto& cmd : commands) {
    if (cmd.group < 0 || cmd.group >= num_groups) {
      throw UsageError(fmt::format("command for unknown group {}", cmd.group));
    }
    if (group_order[cmd.group] >= 0) {
      throw UsageError(fmt::format("two commands for group {}", cmd.group));
    }
    order_kind(cmd.order);
    group_order[cmd.group] = cmd.order;
  }

  // Order per unit id; enemies and ungrouped allies hold (stop).
  const int id_bound = state.ally_start_count + state.enemy_start_count;
  std::vector<int> order_by_id(id_bound, kStopOrder);
  for (int g = 0; g < num_groups; ++g) {
    bool any_alive = false;
    for (int id : group_members[g]) {
      const Unit* u = state.find(id);
      if (u == nullptr) continue;
      if (u->team != Team::kAlly) {
        throw UsageError(fmt::format("unit {} in group {} is not an ally", id, g));
      }
      any_alive = true;
      order_by_id[id] = group_order[g];
    }
    if (any_alive && group_order[g] < 0) {
      throw UsageError(fmt::format("no command for non-empty group {}", g));
    }
  }

  const double hp_before = state.total_hp(Team::kEnemy);
  const int count_before = state.count(Team::kEnemy);

  for (int t = 0; t < config_.frame_skip; ++t) {
    tick(state, order_by_id);
    if (state.count(Team::kAlly) == 0 || state.count(Team::kEnemy) == 0) break;
  }
  ++state.decisions;

  StepResult r;
  const double hp_after = state.total_hp(Team::kEnemy);
  const int count_after = state.count(Team::kEnemy);
  r.damage_term = (hp_before - hp_after) / state.enemy_start_hp;
  r.kill_term = 4.0 * static_cast<double>(count_before - count_after) /
                state.enemy_start_count;
  const bool enemies_dead = count_after == 0;
  const bool allies_dead = state.count(Team::kAlly) == 0;
  r.won = enemies_dead && !allies_dead;
  r.win_term = r.won ? 8.0 : 0.0;
  r.reward = r.damage_term + r.kill_term + r.win_term;
  r.done = enemies_dead || allies_dead || state.decisions >= config_.tick_limit;
  state.done = r.done;
  state.won = r.won;
  return r;
}

void BattleSim::tick(BattleState& state, const std::vector<int>& order_by_id) const {
  auto& units = state.units;
  const int n = static_cast<int>(units.size());
  for (Unit& u : units) {
    if (u.cooldown_remaining > 0) --u.cooldown_remaining;
  }

  // Contact engages a holding enemy before it picks its intent.
  for (Unit& e : units) {
    if (e.team == Team::kEnemy && !e.engaged &&
        closest(state, e.position, Team::kAlly, e.range) >= 0) {
      e.engaged = true;
    }
  }
  const std::vector<EnemyOrder> enemy_orders = scripted_opponent(state);

  // Intents are decided on the pre-tick snapshot, then applied together.
  std::vector<int> attack_target(n, -1);  // index into units
  std::vector<Vec2> move(n);
  std::size_t next_enemy = 0;
  for (int i = 0; i < n; ++i) {
    Unit& u = units[i];
    if (u.team == Team::kEnemy) {
      const EnemyOrder& o = enemy_orders[next_enemy++];
      if (o.intent == EnemyIntent::kHold) {
        u.last_order = "hold";
        continue;
      }
      const Unit* target = state.find(o.target);
      const int ti = static_cast<int>(target - units.data());
      if (o.intent == EnemyIntent::kAttack) {
        u.last_order = "attack";
        if (u.cooldown_remaining == 0) attack_target[i] = ti;
      } else {
        u.last_order = "approach";
        const double d = distance(u.position, target->position);
        const double want = std::max(0.0, d - 0.95 * u.range);
        move[i] = step_toward(u.position, target->position, std::min(u.speed, want));
      }
      continue;
    }

    const int order = order_by_id[u.id];
    u.last_order = order_name(order);
    const OrderKind kind = order_kind(order);
    if (kind == OrderKind::kMove) {
      move[i] = direction_vector(order_direction(order)) * u.speed;
      continue;
    }
    const int target = closest(state, u.position, Team::kEnemy, u.range);
    if (target >= 0) {
      // Engaged: fire when ready, otherwise hold position.
      if (u.cooldown_remaining == 0) attack_target[i] = target;
      continue;
    }
    if (kind == OrderKind::kAttackMove) {
      move[i] = direction_vector(order_direction(order)) * u.speed;
    }
  }

  for (int i = 0; i < n; ++i) {
    if (attack_target[i] < 0) continue;
    Unit& target = units[attack_target[i]];
    target.hp = std::max(0.0, target.hp - units[i].damage);
    if (target.team == Team::kEnemy) target.engaged = true;
    units[i].cooldown_remaining = units[i].cooldown_duration;
  }
  for (int i = 0; i < n; ++i) {
    const Vec2 before = units[i].position;
    units[i].position =
        clamp_to_arena(units[i].position + move[i], state.width, state.height);
    units[i].velocity = units[i].position - before;
  }
  std::erase_if(units, [](const Unit& u) { return u.hp <= 0.0; });
  ++state.tick;
}

std::vector<float> unit_features(const BattleState& state, const Unit& unit,
                                 int group, int num_groups) {
  std::vector<float> f(unit_feature_width(num_groups), 0.0f);
  const Team other = unit.team == Team::kAlly ? Team::kEnemy : Team::kAlly;
  Vec2 centroid;
  int n = 0;
  double nearest = std::numeric_limits<double>::infinity();
  for (const Unit& u : state.units) {
    if (u.team != other) continue;
    centroid = centroid + u.position;
    ++n;
    nearest = std::min(nearest, distance(unit.position, u.position));
  }
  const double diag = std::hypot(state.width, state.height);
  f[0] = static_cast<float>(unit.position.x / state.width);
  f[1] = static_cast<float>(unit.position.y / state.height);
  if (unit.speed > 0) {
    f[2] = static_cast<float>(unit.velocity.x / unit.speed);
    f[3] = static_cast<float>(unit.velocity.y / unit.speed);
  }
  f[4] = static_cast<float>(unit.hp / unit.max_hp);
  f[5] = static_cast<float>(static_cast<double>(unit.cooldown_remaining) /
                            unit.cooldown_duration);
  f[6] = unit.team == Team::kAlly ? 1.0f : 0.0f;
  if (n > 0) {
    centroid = centroid * (1.0 / n);
    f[7] = static_cast<float>((centroid.x - unit.position.x) / state.width);
    f[8] = static_cast<float>((centroid.y - unit.position.y) / state.height);
    f[9] = static_cast<float>(nearest / diag);
  }
  f[10] = unit.engaged ? 1.0f : 0.0f;
  if (unit.team == Team::kAlly && group >= 0 && group < num_groups) {
    f[kBaseUnitFeatures + group] = 1.0f;
  }
  return f;
}

void write_trace_header(std::ostream& out) {
  out << "tick,decision,unit,team,x,y,hp,order\n";
}

void write_trace(std::ostream& out, const BattleState& state) {
  for (const Unit& u : state.units) {
    out << fmt::format("{},{},{},{},{:.4f},{:.4f},{:.4f},{}\n", state.tick,
                       state.decisions, u.id,
                       u.team == Team::kAlly ? "ally" : "enemy", u.position.x,
                       u.position.y, u.hp,
                       u.last_order.empty() ? "none" : u.last_order);
  }
}

}  // namespace gas::battle
