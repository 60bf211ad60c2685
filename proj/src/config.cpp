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

#include "gas/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "gas/errors.hpp"

extern char** environ;

namespace gas {

namespace {

const std::vector<std::string> kTasks = {"acrobot", "mountain_car", "microbattle"};
const std::vector<std::string> kAlgorithms = {"gas",   "scratch_fixed_level", "on_ac",
                                              "sep_q", "max_target",          "slow_epsilon"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

// Value codecs. parse() throws std::invalid_argument with a short reason.
template <typename T>
T parse_value(const std::string& s);

template <typename T>
T parse_integer(const std::string& s) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) {
    throw std::invalid_argument("expected an integer");
  }
  return v;
}

template <>
int parse_value<int>(const std::string& s) { return parse_integer<int>(s); }
template <>
std::int64_t parse_value<std::int64_t>(const std::string& s) {
  return parse_integer<std::int64_t>(s);
}
template <>
double parse_value<double>(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) {
    throw std::invalid_argument("expected a number");
  }
  return v;
}
template <>
bool parse_value<bool>(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("expected true or false");
}
template <>
std::string parse_value<std::string>(const std::string& s) { return s; }
template <>
std::vector<int> parse_value<std::vector<int>>(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split_list(s)) out.push_back(parse_integer<int>(item));
  return out;
}
template <>
std::vector<std::uint64_t> parse_value<std::vector<std::uint64_t>>(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(s)) out.push_back(parse_integer<std::uint64_t>(item));
  return out;
}

template <typename T>
std::string format_value(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::vector<int>> ||
                       std::is_same_v<T, std::vector<std::uint64_t>>) {
    return fmt::format("{}", fmt::join(v, ","));
  } else {
    return fmt::format("{}", v);
  }
}

struct Key {
  std::string section;
  std::string name;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <typename Access>
Key field(std::string section, std::string name, Access access) {
  using T = std::remove_reference_t<decltype(access(std::declval<ExperimentConfig&>()))>;
  return Key{std::move(section), std::move(name),
             [access](const ExperimentConfig& c) {
               return format_value<T>(access(const_cast<ExperimentConfig&>(c)));
             },
             [access](ExperimentConfig& c, const std::string& v) {
               access(c) = parse_value<T>(v);
             }};
}

#define GAS_KEY(section, name, expr) \
  field(section, name, [](ExperimentConfig& c) -> auto& { return expr; })

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      GAS_KEY("experiment", "name", c.name),
      GAS_KEY("experiment", "task", c.task),
      GAS_KEY("experiment", "algorithm", c.algorithm),
      GAS_KEY("experiment", "seeds", c.seeds),
      GAS_KEY("experiment", "output_dir", c.output_dir),
      GAS_KEY("experiment", "record_wall_clock", c.record_wall_clock),
      GAS_KEY("experiment", "save_checkpoint", c.save_checkpoint),
      GAS_KEY("experiment", "fixed_level", c.fixed_level),
      GAS_KEY("experiment", "moving_average_window", c.window),

      GAS_KEY("curriculum", "lead_in", c.schedule.lead_in),
      GAS_KEY("curriculum", "growth", c.schedule.growth),

      GAS_KEY("epsilon", "start", c.epsilon.start),
      GAS_KEY("epsilon", "end", c.epsilon.end),
      GAS_KEY("epsilon", "decay_steps", c.epsilon.steps),

      GAS_KEY("optimizer", "learning_rate", c.adam.learning_rate),
      GAS_KEY("optimizer", "beta1", c.adam.beta1),
      GAS_KEY("optimizer", "beta2", c.adam.beta2),
      GAS_KEY("optimizer", "epsilon", c.adam.epsilon),

      GAS_KEY("control", "time_limit", c.control.time_limit),
      GAS_KEY("control", "max_level", c.control.max_level),
      GAS_KEY("control", "gamma", c.control.gamma),
      GAS_KEY("control", "batch_size", c.control.batch_size),
      GAS_KEY("control", "replay_capacity", c.control.replay_capacity),
      GAS_KEY("control", "target_interval", c.control.target_interval),
      GAS_KEY("control", "env_steps_per_update", c.control.env_steps_per_update),
      GAS_KEY("control", "total_env_steps", c.control.total_env_steps),
      GAS_KEY("control", "encoder_widths", c.control.encoder_widths),
      GAS_KEY("control", "refine_width", c.control.refine_width),

      GAS_KEY("battle", "ally_count", c.battle.scenario.ally_count),
      GAS_KEY("battle", "enemy_count", c.battle.scenario.enemy_count),
      GAS_KEY("battle", "ally_hp", c.battle.scenario.ally_stats.hp),
      GAS_KEY("battle", "ally_damage", c.battle.scenario.ally_stats.damage),
      GAS_KEY("battle", "ally_range", c.battle.scenario.ally_stats.range),
      GAS_KEY("battle", "ally_speed", c.battle.scenario.ally_stats.speed),
      GAS_KEY("battle", "ally_cooldown", c.battle.scenario.ally_stats.cooldown),
      GAS_KEY("battle", "enemy_hp", c.battle.scenario.enemy_stats.hp),
      GAS_KEY("battle", "enemy_damage", c.battle.scenario.enemy_stats.damage),
      GAS_KEY("battle", "enemy_range", c.battle.scenario.enemy_stats.range),
      GAS_KEY("battle", "enemy_speed", c.battle.scenario.enemy_stats.speed),
      GAS_KEY("battle", "enemy_cooldown", c.battle.scenario.enemy_stats.cooldown),
      GAS_KEY("battle", "arena_width", c.battle.scenario.arena_width),
      GAS_KEY("battle", "arena_height", c.battle.scenario.arena_height),
      GAS_KEY("battle", "tick_limit", c.battle.scenario.tick_limit),
      GAS_KEY("battle", "frame_skip", c.battle.scenario.frame_skip),
      GAS_KEY("battle", "ally_spawn_radius", c.battle.scenario.ally_spawn_radius),
      GAS_KEY("battle", "enemy_spawn_radius", c.battle.scenario.enemy_spawn_radius),
      GAS_KEY("battle", "spawn_gap", c.battle.scenario.spawn_gap),
      GAS_KEY("battle", "max_depth", c.battle.max_depth),
      GAS_KEY("battle", "branching", c.battle.branching),
      GAS_KEY("battle", "gamma", c.battle.gamma),
      GAS_KEY("battle", "n_step", c.battle.n_step),
      GAS_KEY("battle", "batch_segments", c.battle.batch_segments),
      GAS_KEY("battle", "queue_capacity", c.battle.queue_capacity),
      GAS_KEY("battle", "target_interval", c.battle.target_interval),
      GAS_KEY("battle", "total_updates", c.battle.total_updates),
      GAS_KEY("battle", "envs_per_actor", c.battle.envs_per_actor),
      GAS_KEY("battle", "workers", c.battle.workers),
      GAS_KEY("battle", "sync_interval", c.battle.sync_interval),
      GAS_KEY("battle", "eval_every", c.battle.eval_every),
      GAS_KEY("battle", "unit_embed", c.battle.unit_embed),
      GAS_KEY("battle", "hidden", c.battle.hidden),
      GAS_KEY("battle", "head_hidden", c.battle.head_hidden),
  };
  return k;
}

#undef GAS_KEY

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : keys()) {
    if (k.section == section && k.name == name) return &k;
  }
  return nullptr;
}

bool known_section(const std::string& s) {
  return std::any_of(keys().begin(), keys().end(),
                     [&](const Key& k) { return k.section == s; });
}

struct Entry {
  const Key* key;
  std::string value;
  std::string where;
};

void apply(ExperimentConfig& c, const Entry& e) {
  try {
    e.key->set(c, e.value);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(fmt::format("{}: {}.{} = '{}': {}", e.where, e.key->section,
                                  e.key->name, e.value, err.what()));
  }
}

std::optional<std::string> lookup(const std::vector<Entry>& entries,
                                  const std::string& section, const std::string& name) {
  std::optional<std::string> out;
  for (const auto& e : entries) {
    if (e.key->section == section && e.key->name == name) out = e.value;
  }
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

train::Algorithm ExperimentConfig::algorithm_switches() const {
  train::Algorithm a;
  if (algorithm == "scratch_fixed_level" || algorithm == "slow_epsilon") {
    a.fixed_level = fixed_level;
  } else if (algorithm == "on_ac") {
    a.level_update = train::LevelUpdate::kOnLevelOnly;
  } else if (algorithm == "sep_q") {
    a.composition = train::Composition::kSeparate;
  } else if (algorithm == "max_target") {
    a.target = train::TargetMode::kMaxLevels;
  }
  return a;
}

train::ControlTrainerConfig ExperimentConfig::control_trainer() const {
  auto c = control;
  c.task = task;
  c.algorithm = algorithm_switches();
  c.schedule = schedule;
  c.schedule.max_level = c.max_level;
  c.schedule.unit = curriculum::StepUnit::kEnvSteps;
  c.epsilon = epsilon;
  c.adam = adam;
  return c;
}

train::BattleTrainerConfig ExperimentConfig::battle_trainer() const {
  auto b = battle;
  b.algorithm = algorithm_switches();
  b.schedule = schedule;
  b.schedule.max_level = b.max_depth;
  b.schedule.unit = curriculum::StepUnit::kModelUpdates;
  b.epsilon = epsilon;
  b.adam = adam;
  return b;
}

void ExperimentConfig::validate() const {
  if (!contains(kTasks, task)) {
    throw ConfigError(fmt::format("experiment.task: unknown task '{}'", task));
  }
  if (!contains(kAlgorithms, algorithm)) {
    throw ConfigError(fmt::format("experiment.algorithm: unknown algorithm '{}'", algorithm));
  }
  if (name.empty() || name.find_first_of("/\\ ") != std::string::npos) {
    throw ConfigError("experiment.name: must be non-empty without spaces or slashes");
  }
  if (seeds.empty()) throw ConfigError("experiment.seeds: at least one seed required");
  if (window < 1) throw ConfigError("experiment.moving_average_window: must be >= 1");
  if (fixed_level < 0) throw ConfigError("experiment.fixed_level: must be >= 0");
  if (!(adam.learning_rate > 0) || !(adam.epsilon > 0) || !(adam.beta1 >= 0 && adam.beta1 < 1) ||
      !(adam.beta2 >= 0 && adam.beta2 < 1)) {
    throw ConfigError("optimizer: learning_rate/epsilon > 0 and betas in [0, 1) required");
  }
  if (epsilon.steps < 0) throw ConfigError("epsilon.decay_steps: must be >= 0");
  try {
    if (is_control()) {
      control_trainer().validate();
    } else {
      battle_trainer().validate();
    }
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("[{}] {}", is_control() ? "control" : "battle", e.what()));
  }
}

ExperimentConfig default_config(const std::string& task, const std::string& algorithm) {
  if (!contains(kTasks, task)) {
    throw ConfigError(fmt::format("experiment.task: unknown task '{}'", task));
  }
  if (!contains(kAlgorithms, algorithm)) {
    throw ConfigError(fmt::format("experiment.algorithm: unknown algorithm '{}'", algorithm));
  }
  ExperimentConfig c;
  c.task = task;
  c.algorithm = algorithm;
  c.name = algorithm;
  if (task == "microbattle") {
    c.schedule = {5000, 10000, 2, curriculum::StepUnit::kModelUpdates};
    c.epsilon = {1.0, 0.1, 10000};
    c.adam = {2.5e-4, 0.9, 0.999, 1e-4};
    c.window = 500;
  } else {
    c.schedule = {25000, 25000, 2, curriculum::StepUnit::kEnvSteps};
    c.epsilon = {1.0, 0.1, 25000};
    c.adam = {5e-4, 0.9, 0.999, 1e-4};
    c.window = 20;
    c.control.gamma = task == "acrobot" ? 0.998 : 0.99;
  }
  if (algorithm == "slow_epsilon") c.epsilon.steps *= 4;
  return c;
}

EnvOverrides environment_overrides() {
  EnvOverrides out;
  const std::string prefix = kEnvPrefix;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string entry = *e;
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    out[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return out;
}

ExperimentConfig parse_config(std::istream& in, const std::string& source,
                              const EnvOverrides& env) {
  std::vector<Entry> entries;
  std::set<std::pair<std::string, std::string>> seen;
  std::string section;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = fmt::format("{}:{}", source, number);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("{}: malformed section header", where));
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section)) {
        throw ConfigError(fmt::format("{}: unknown section [{}]", where, section));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}: expected 'key = value'", where));
    }
    if (section.empty()) throw ConfigError(fmt::format("{}: key outside any section", where));
    const std::string name = trim(line.substr(0, eq));
    const Key* key = find_key(section, name);
    if (key == nullptr) {
      throw ConfigError(fmt::format("{}: unknown key '{}' in [{}]", where, name, section));
    }
    if (!seen.insert({section, name}).second) {
      throw ConfigError(fmt::format("{}: duplicate key {}.{}", where, section, name));
    }
    entries.push_back({key, trim(line.substr(eq + 1)), where});
  }

  const std::string prefix = kEnvPrefix;
  for (const auto& [var, value] : env) {
    if (var.rfind(prefix, 0) != 0) continue;
    const std::string rest = var.substr(prefix.size());
    const auto sep = rest.find("__");
    if (sep == std::string::npos) {
      throw ConfigError(fmt::format("environment {}: expected {}<SECTION>__<KEY>", var, prefix));
    }
    std::string sec = rest.substr(0, sep);
    std::string name = rest.substr(sep + 2);
    std::transform(sec.begin(), sec.end(), sec.begin(), [](unsigned char ch) { return std::tolower(ch); });
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
    const Key* key = find_key(sec, name);
    if (key == nullptr) {
      throw ConfigError(fmt::format("environment {}: unknown key {}.{}", var, sec, name));
    }
    entries.push_back({key, trim(value), fmt::format("environment {}", var)});
  }

  const auto task = lookup(entries, "experiment", "task").value_or("mountain_car");
  const auto algorithm = lookup(entries, "experiment", "algorithm").value_or("gas");
  ExperimentConfig c = default_config(task, algorithm);
  for (const auto& e : entries) apply(c, e);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path, const EnvOverrides& env) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  return parse_config(in, path, env);
}

std::string serialise(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) out += "\n";
      section = k.section;
      out += fmt::format("[{}]\n", section);
    }
    out += fmt::format("{} = {}\n", k.name, k.get(config));
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.push_back(k.section + "." + k.name);
  return out;
}

}  // namespace gas
