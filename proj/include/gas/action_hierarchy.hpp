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

#include <string>
#include <vector>

namespace gas {

// Nested action sets A_0 c A_1 c ... c A_{N-1}.
//
// Action ids are dense and stable across levels: level l holds ids
// [0, size(l)), and the first size(l-1) of those are exactly the actions of
// level l-1. Every action carries a scalar payload (a force for discretised
// control, an abstract tag otherwise).
class ActionHierarchy {
 public:
  ActionHierarchy() = default;

  // Builds from per-level payload tables; parent ids per level (level 0's
  // entry is ignored). Validates the subset chain, self-parenting and parent
  // totality; throws ConfigError on violation.
  ActionHierarchy(std::vector<std::vector<double>> payloads,
                  std::vector<std::vector<int>> parents);

  // Dyadic force ladder: A_0 = {+1, -1}; each level-(l-1) action a spawns
  // a child a - sign(a) * 2^-l. Parents are assigned by nearest neighbour in
  // the previous level, with exact midpoints going to the larger magnitude.
  static ActionHierarchy force_ladder(int max_level);

  // One level holding the given payloads (used for fixed-level baselines).
  static ActionHierarchy single_level(std::vector<double> payloads);

  // The nearest neighbour of `payload` within `level`, ties toward the larger
  // magnitude, then toward the positive value.
  int nearest_in_level(int level, double payload) const;

  int num_levels() const { return static_cast<int>(payloads_.size()); }
  int size(int level) const;
  double payload(int level, int action) const;
  const std::vector<double>& payloads(int level) const;

  // Parent of `action` (in level `level`) within level - 1.
  int parent_of(int level, int action) const;

  // Ancestors from level 0 up to `level`; chain[level] == action.
  std::vector<int> ancestor_chain(int level, int action) const;

  // Plain-text table: "level\taction\tpayload\tparent", parent -1 at level 0.
  std::string dump() const;

 private:
  void check(int level, int action) const;

  std::vector<std::vector<double>> payloads_;
  std::vector<std::vector<int>> parents_;
};

}  // namespace gas
