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

#include "gas/grouping.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "gas/errors.hpp"

namespace gas::grouping {

namespace {

std::vector<Vec2> cold_centroids(std::span<const UnitPosition> members, int k) {
  const int n = static_cast<int>(members.size());
  std::vector<int> chosen;
  // Farthest-apart pair, lowest index pair on ties.
  int bi = 0, bj = 0;
  double best = -1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = distance_squared(members[i].position, members[j].position);
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  chosen.push_back(bi);
  if (k >= 2) chosen.push_back(n > 1 ? bj : bi);
  while (static_cast<int>(chosen.size()) < k) {
    int arg = 0;
    double far = -1.0;
    for (int i = 0; i < n; ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (int c : chosen) {
        nearest = std::min(nearest,
                           distance_squared(members[i].position, members[c].position));
      }
      if (nearest > far) {
        far = nearest;
        arg = i;
      }
    }
    chosen.push_back(arg);
  }
  std::vector<Vec2> centroids;
  for (int c : chosen) centroids.push_back(members[c].position);
  return centroids;
}

int distinct_positions(std::span<const UnitPosition> members, int cap) {
  std::vector<Vec2> seen;
  for (const auto& m : members) {
    if (std::find(seen.begin(), seen.end(), m.position) == seen.end()) {
      seen.push_back(m.position);
      if (static_cast<int>(seen.size()) >= cap) break;
    }
  }
  return static_cast<int>(seen.size());
}

SplitResult lloyd(std::span<const UnitPosition> members,
                  std::vector<Vec2> centroids) {
  const int n = static_cast<int>(members.size());
  const int k = static_cast<int>(centroids.size());
  std::vector<int> assignment(n, -1);
  SplitResult result;
  for (int iter = 0; iter < kLloydIterationCap; ++iter) {
    std::vector<int> next(n);
    for (int i = 0; i < n; ++i) {
      int arg = 0;
      double best = distance_squared(members[i].position, centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = distance_squared(members[i].position, centroids[c]);
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      next[i] = arg;
    }
    result.iterations = iter + 1;
    if (next == assignment) break;
    assignment = std::move(next);
    std::vector<Vec2> sum(k);
    std::vector<int> count(k, 0);
    for (int i = 0; i < n; ++i) {
      sum[assignment[i]] = sum[assignment[i]] + members[i].position;
      ++count[assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) centroids[c] = sum[c] * (1.0 / count[c]);
    }
  }
  result.members.assign(k, {});
  for (int i = 0; i < n; ++i) result.members[assignment[i]].push_back(members[i].id);
  for (auto& m : result.members) std::sort(m.begin(), m.end());
  result.centroids = std::move(centroids);
  return result;
}

}  // namespace

SplitResult split_group(std::span<const UnitPosition> members, int k,
                        const std::vector<Vec2>* warm_centroids) {
  if (k < 2) throw ConfigError("split_group requires k >= 2");
  if (members.empty()) throw UsageError("split_group requires members");
  if (warm_centroids != nullptr &&
      static_cast<int>(warm_centroids->size()) != k) {
    throw ConfigError("warm centroid count must equal k");
  }
  const bool warm = warm_centroids != nullptr;
  SplitResult result =
      lloyd(members, warm ? *warm_centroids : cold_centroids(members, k));
  if (warm) {
    const bool any_empty =
        std::any_of(result.members.begin(), result.members.end(),
                    [](const auto& m) { return m.empty(); });
    if (any_empty && distinct_positions(members, k) >= k) {
      result = lloyd(members, cold_centroids(members, k));
    }
  }
  return result;
}

int GroupTree::num_groups(int level) const {
  return static_cast<int>(this->level(level).size());
}

const std::vector<Group>& GroupTree::level(int l) const {
  if (l < 0 || l >= static_cast<int>(levels_.size())) {
    throw LookupError(fmt::format("group tree has no level {}", l));
  }
  return levels_[l];
}

const Group& GroupTree::group(int level, int id) const {
  const auto& groups = this->level(level);
  if (id < 0 || id >= static_cast<int>(groups.size())) {
    throw LookupError(fmt::format("no group {} at level {}", id, level));
  }
  return groups[id];
}

int GroupTree::group_of(int level, int unit_id) const {
  this->level(level);
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), unit_id);
  if (it == ids_.end() || *it != unit_id) {
    throw LookupError(fmt::format("unit {} is not in the group tree", unit_id));
  }
  return assignment_[level][it - ids_.begin()];
}

bool GroupTree::same_assignment(const GroupTree& other) const {
  if (k_ != other.k_ || levels_.size() != other.levels_.size()) return false;
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    for (std::size_t g = 0; g < levels_[l].size(); ++g) {
      if (levels_[l][g].members != other.levels_[l][g].members) return false;
    }
  }
  return true;
}

std::string GroupTree::describe() const {
  std::ostringstream out;
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    out << "level " << l << ":";
    for (const auto& g : levels_[l]) {
      out << " [";
      for (std::size_t i = 0; i < g.members.size(); ++i) {
        out << (i ? " " : "") << g.members[i];
      }
      out << "]";
    }
    out << "\n";
  }
  return out.str();
}

GroupTree build_group_tree(std::span<const UnitPosition> units, int depth, int k,
                           const GroupTree* previous) {
  if (units.empty()) throw UsageError("build_group_tree requires a unit");
  if (depth < 0) throw ConfigError("group tree depth must be >= 0");
  if (k < 2) throw ConfigError("group tree branching must be >= 2");

  std::vector<UnitPosition> sorted(units.begin(), units.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].id == sorted[i - 1].id) {
      throw ConfigError(fmt::format("duplicate unit id {}", sorted[i].id));
    }
  }
  const bool warm = previous != nullptr && previous->k_ == k &&
                    previous->depth() >= depth;

  GroupTree tree;
  tree.k_ = k;
  for (const auto& u : sorted) tree.ids_.push_back(u.id);
  auto position_of = [&](int id) {
    const auto it = std::lower_bound(
        sorted.begin(), sorted.end(), id,
        [](const UnitPosition& u, int v) { return u.id < v; });
    return it->position;
  };

  Group root;
  root.members = tree.ids_;
  Vec2 sum;
  for (const auto& u : sorted) sum = sum + u.position;
  root.centroid = sum * (1.0 / static_cast<double>(sorted.size()));
  root.has_centroid = true;
  tree.levels_.push_back({root});

  for (int l = 0; l < depth; ++l) {
    const auto& parents = tree.levels_[l];
    std::vector<Group> children(parents.size() * k);
    for (std::size_t g = 0; g < parents.size(); ++g) {
      std::vector<Vec2> warm_centroids;
      bool use_warm = warm;
      if (warm) {
        for (int c = 0; c < k; ++c) {
          const Group& prev = previous->levels_[l + 1][g * k + c];
          if (!prev.has_centroid) use_warm = false;
          warm_centroids.push_back(prev.centroid);
        }
      }
      if (parents[g].empty()) {
        for (int c = 0; c < k; ++c) {
          Group& child = children[g * k + c];
          if (use_warm) {
            child.centroid = warm_centroids[c];
            child.has_centroid = true;
          }
        }
        continue;
      }
      std::vector<UnitPosition> members;
      for (int id : parents[g].members) members.push_back({id, position_of(id)});
      const SplitResult split =
          split_group(members, k, use_warm ? &warm_centroids : nullptr);
      for (int c = 0; c < k; ++c) {
        Group& child = children[g * k + c];
        child.members = split.members[c];
        child.centroid = split.centroids[c];
        child.has_centroid = true;
      }
    }
    tree.levels_.push_back(std::move(children));
  }

  tree.assignment_.assign(tree.levels_.size(),
                          std::vector<int>(tree.ids_.size(), -1));
  for (std::size_t l = 0; l < tree.levels_.size(); ++l) {
    for (std::size_t g = 0; g < tree.levels_[l].size(); ++g) {
      for (int id : tree.levels_[l][g].members) {
        const auto idx = std::lower_bound(tree.ids_.begin(), tree.ids_.end(), id) -
                         tree.ids_.begin();
        tree.assignment_[l][idx] = static_cast<int>(g);
      }
    }
  }
  return tree;
}

}  // namespace gas::grouping
