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
#include <random>

#include <doctest.h>

#include "gas/curriculum.hpp"
#include "gas/errors.hpp"

using namespace gas::curriculum;

TEST_CASE("alpha schedule") {
  CurriculumSchedule s{25000, 25000, 2, StepUnit::kEnvSteps};
  CHECK(alpha_at(s, 0) == 0.0);
  CHECK(alpha_at(s, 25000) == 0.0);
  CHECK(alpha_at(s, 50000) == 1.0);
  CHECK(alpha_at(s, 37500) == 0.5);
  CHECK(alpha_at(s, 25000 + 10 * 25000) == 2.0);

  CurriculumSchedule battle{5000, 10000, 2, StepUnit::kModelUpdates};
  CHECK(alpha_at(battle, 15000) == 1.0);
  CHECK(alpha_at(battle, 25000) == 2.0);

  // Non-decreasing and piecewise linear.
  double prev = 0.0;
  for (std::int64_t t = 0; t < 200000; t += 997) {
    const double a = alpha_at(s, t);
    CHECK(a >= prev);
    prev = a;
    if (t > 25000 && t < 75000) {
      CHECK(a == doctest::Approx((t - 25000) / 25000.0).epsilon(1e-15));
    }
  }
  CHECK_THROWS_AS((CurriculumSchedule{-1, 1, 2}.validate()), gas::ConfigError);
  CHECK_THROWS_AS((CurriculumSchedule{0, 0, 2}.validate()), gas::ConfigError);
}

TEST_CASE("sample_level frequencies") {
  std::mt19937_64 rng(11);
  CHECK(sample_level(2.0, rng) == 2);
  CHECK(sample_level(0.0, rng) == 0);
  for (double alpha : {0.25, 0.5, 1.3, 1.9}) {
    const int lo = static_cast<int>(std::floor(alpha));
    const int n = 100000;
    int low = 0;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const int l = sample_level(alpha, rng);
      CHECK((l == lo || l == lo + 1));
      low += l == lo;
      sum += l;
    }
    const double p_low = std::ceil(alpha) - alpha;
    CHECK(std::abs(static_cast<double>(low) / n - p_low) <= 0.01);
    CHECK(std::abs(sum / n - alpha) <= 0.01);
  }
  CHECK_THROWS_AS(sample_level(-0.1, rng), gas::UsageError);
}

TEST_CASE("linear decay") {
  LinearDecay d{1.0, 0.1, 25000};
  CHECK(d.at(0) == 1.0);
  CHECK(d.at(12500) == doctest::Approx(0.55));
  CHECK(d.at(25000) == 0.1);
  CHECK(d.at(1000000) == 0.1);
  LinearDecay slow{1.0, 0.1, 100000};
  CHECK(slow.at(25000) == doctest::Approx(0.775));
}
