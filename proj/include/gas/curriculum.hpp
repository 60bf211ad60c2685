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

#include <cstdint>
#include <random>

namespace gas::curriculum {

enum class StepUnit { kEnvSteps, kModelUpdates };

// alpha stays 0 through the lead-in, then grows by one level per `growth`
// steps until it reaches max_level.
struct CurriculumSchedule {
  std::int64_t lead_in = 25000;
  std::int64_t growth = 25000;
  int max_level = 2;
  StepUnit unit = StepUnit::kEnvSteps;

  void validate() const;
};

double alpha_at(const CurriculumSchedule& schedule, std::int64_t step);

// floor(alpha) with probability ceil(alpha) - alpha, ceil(alpha) otherwise.
int sample_level(double alpha, std::mt19937_64& rng);

// Linear interpolation from `start` to `end` over `steps`, then constant.
struct LinearDecay {
  double start = 1.0;
  double end = 0.1;
  std::int64_t steps = 25000;

  double at(std::int64_t step) const;
};

}  // namespace gas::curriculum
