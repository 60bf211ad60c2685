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

#include "gas/curriculum.hpp"

#include <algorithm>
#include <cmath>

#include "gas/errors.hpp"

namespace gas::curriculum {

void CurriculumSchedule::validate() const {
  if (lead_in < 0) throw ConfigError("curriculum: lead_in must be >= 0");
  if (growth <= 0) throw ConfigError("curriculum: growth must be > 0");
  if (max_level < 0) throw ConfigError("curriculum: max_level must be >= 0");
}

double alpha_at(const CurriculumSchedule& schedule, std::int64_t step) {
  if (step <= schedule.lead_in) return 0.0;
  const double a = static_cast<double>(step - schedule.lead_in) /
                   static_cast<double>(schedule.growth);
  return std::min(static_cast<double>(schedule.max_level), a);
}

int sample_level(double alpha, std::mt19937_64& rng) {
  if (!(alpha >= 0.0)) throw UsageError("sample_level: alpha must be >= 0");
  const double lo = std::floor(alpha);
  const double frac = alpha - lo;
  if (frac == 0.0) return static_cast<int>(lo);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return static_cast<int>(lo) + (u(rng) < frac ? 1 : 0);
}

double LinearDecay::at(std::int64_t step) const {
  if (steps <= 0 || step >= steps) return end;
  const double t = static_cast<double>(std::max<std::int64_t>(step, 0)) /
                   static_cast<double>(steps);
  return start + (end - start) * t;
}

}  // namespace gas::curriculum
