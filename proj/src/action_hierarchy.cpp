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

#include "gas/action_hierarchy.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "gas/errors.hpp"

namespace gas {

ActionHierarchy::ActionHierarchy(std::vector<std::vector<double>> payloads,
                                 std::vector<std::vector<int>> parents)
    : payloads_(std::move(payloads)), parents_(std::move(parents)) {
  if (payloads_.empty()) throw ConfigError("hierarchy needs at least one level");
  if (parents_.size() != payloads_.size()) {
    throw ConfigError("hierarchy: one parent table per level required");
  }
  if (payloads_[0].empty()) throw ConfigError("hierarchy: empty level 0");
  parents_[0].assign(payloads_[0].size(), -1);
  for (std::size_t l = 1; l < payloads_.size(); ++l) {
    const auto& prev = payloads_[l - 1];
    const auto& cur = payloads_[l];
    if (cur.size() <= prev.size()) {
      throw ConfigError(fmt::format("hierarchy level {} does not grow", l));
    }
    if (parents_[l].size() != cur.size()) {
      throw ConfigError(fmt::format("hierarchy level {}: parent table size", l));
    }
    for (std::size_t a = 0; a < prev.size(); ++a) {
      if (cur[a] != prev[a]) {
        throw ConfigError(fmt::format(
            "hierarchy level {}: action {} breaks the subset chain", l, a));
      }
      if (parents_[l][a] != static_cast<int>(a)) {
        throw ConfigError(fmt::format(
            "hierarchy level {}: action {} must be its own parent", l, a));
      }
    }
    for (std::size_t a = prev.size(); a < cur.size(); ++a) {
      const int p = parents_[l][a];
      if (p < 0 || p >= static_cast<int>(prev.size())) {
        throw ConfigError(
            fmt::format("hierarchy level {}: action {} has no parent", l, a));
      }
    }
  }
}

ActionHierarchy ActionHierarchy::force_ladder(int max_level) {
  if (max_level < 0 || max_level > 8) {
    throw ConfigError("force ladder max_level must be in [0, 8]");
  }
  std::vector<std::vector<double>> payloads{{+1.0, -1.0}};
  std::vector<std::vector<int>> parents{{-1, -1}};
  ActionHierarchy h(payloads, parents);
  for (int l = 1; l <= max_level; ++l) {
    std::vector<double> level = h.payloads_.back();
    const double step = std::ldexp(1.0, -l);
    for (double a : h.payloads_.back()) {
      level.push_back(a - std::copysign(step, a));
    }
    std::vector<int> par(level.size());
    for (std::size_t a = 0; a < level.size(); ++a) {
      par[a] = h.nearest_in_level(l - 1, level[a]);
    }
    h.payloads_.push_back(std::move(level));
    h.parents_.push_back(std::move(par));
  }
  // Re-run validation on the finished ladder.
  return ActionHierarchy(h.payloads_, h.parents_);
}

ActionHierarchy ActionHierarchy::single_level(std::vector<double> payloads) {
  std::vector<std::vector<int>> parents{std::vector<int>(payloads.size(), -1)};
  return ActionHierarchy({std::move(payloads)}, std::move(parents));
}

int ActionHierarchy::nearest_in_level(int level, double payload) const {
  check(level, 0);
  const auto& ps = payloads_[level];
  int best = 0;
  for (int a = 1; a < static_cast<int>(ps.size()); ++a) {
    const double d = std::abs(ps[a] - payload);
    const double db = std::abs(ps[best] - payload);
    if (d < db) {
      best = a;
    } else if (d == db) {
      if (std::abs(ps[a]) > std::abs(ps[best]) ||
          (std::abs(ps[a]) == std::abs(ps[best]) && ps[a] > ps[best])) {
        best = a;
      }
    }
  }
  return best;
}

int ActionHierarchy::size(int level) const {
  if (level < 0 || level >= num_levels()) {
    throw LookupError(fmt::format("no level {}", level));
  }
  return static_cast<int>(payloads_[level].size());
}

double ActionHierarchy::payload(int level, int action) const {
  check(level, action);
  return payloads_[level][action];
}

const std::vector<double>& ActionHierarchy::payloads(int level) const {
  check(level, 0);
  return payloads_[level];
}

int ActionHierarchy::parent_of(int level, int action) const {
  if (level < 1) throw LookupError("parent_of requires level >= 1");
  check(level, action);
  return parents_[level][action];
}

std::vector<int> ActionHierarchy::ancestor_chain(int level, int action) const {
  check(level, action);
  std::vector<int> chain(level + 1);
  chain[level] = action;
  for (int l = level; l > 0; --l) chain[l - 1] = parents_[l][chain[l]];
  return chain;
}

std::string ActionHierarchy::dump() const {
  std::ostringstream out;
  out << "level\taction\tpayload\tparent\n";
  for (int l = 0; l < num_levels(); ++l) {
    for (int a = 0; a < size(l); ++a) {
      out << fmt::format("{}\t{}\t{}\t{}\n", l, a, payloads_[l][a],
                         l == 0 ? -1 : parents_[l][a]);
    }
  }
  return out.str();
}

void ActionHierarchy::check(int level, int action) const {
  if (level < 0 || level >= num_levels()) {
    throw LookupError(fmt::format("no level {}", level));
  }
  if (action < 0 || action >= static_cast<int>(payloads_[level].size())) {
    throw LookupError(fmt::format("no action {} at level {}", action, level));
  }
}

}  // namespace gas
