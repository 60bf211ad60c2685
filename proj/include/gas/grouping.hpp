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

// Hierarchical k-means grouping of allied units. Level 0 is one group with
// every unit; each group at level l is split into k children at level l+1.
// Group ids are positional: child c of group g at the next level has id
// g * k + c, so a level holds exactly k^l slots, some possibly empty.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gas/geometry.hpp"

namespace gas::grouping {

inline constexpr int kLloydIterationCap = 20;

struct UnitPosition {
  int id = 0;
  Vec2 position;
};

struct Group {
  std::vector<int> members;  // sorted unit ids
  Vec2 centroid;
  bool has_centroid = false;  // false for slots that never held a member

  bool empty() const { return members.empty(); }
};

struct SplitResult {
  std::vector<std::vector<int>> members;  // per sub-group, sorted ids
  std::vector<Vec2> centroids;
  int iterations = 0;
};

// Lloyd's algorithm over the given members. Without warm centroids the
// initial centroids are the farthest-apart pair (then farthest-point for
// k > 2). Ties in assignment go to the lowest centroid index. A cluster left
// empty while there are at least k distinct positions triggers one cold
// restart. Empty clusters keep their previous centroid.
SplitResult split_group(std::span<const UnitPosition> members, int k,
                        const std::vector<Vec2>* warm_centroids = nullptr);

class GroupTree {
 public:
  GroupTree() = default;

  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  int branching() const { return k_; }
  int num_groups(int level) const;
  const Group& group(int level, int id) const;
  const std::vector<Group>& level(int l) const;

  // Throws LookupError for units not present at construction.
  int group_of(int level, int unit_id) const;
  int parent_group(int level, int id) const { (void)level; return id / k_; }

  const std::vector<int>& unit_ids() const { return ids_; }

  bool same_assignment(const GroupTree& other) const;
  std::string describe() const;

 private:
  friend GroupTree build_group_tree(std::span<const UnitPosition>, int, int,
                                    const GroupTree*);
  int k_ = 2;
  std::vector<std::vector<Group>> levels_;
  std::vector<int> ids_;                      // sorted unit ids
  std::vector<std::vector<int>> assignment_;  // [level][index into ids_]
};

// Recursive k-split down to `depth`. When `previous` is given its centroids
// warm-start the corresponding positional slots. Throws UsageError if there
// are no units.
GroupTree build_group_tree(std::span<const UnitPosition> units, int depth,
                           int k = 2, const GroupTree* previous = nullptr);

}  // namespace gas::grouping
