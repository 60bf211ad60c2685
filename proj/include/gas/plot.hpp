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

// Static SVG learning curves: one line per aggregate with a shaded band of
// plus/minus one standard error.

#include <string>
#include <vector>

#include "gas/metrics.hpp"

namespace gas {

struct Curve {
  std::string label;
  Aggregate aggregate;
};

enum class XColumn { kIndex, kEnvSteps, kModelUpdates };

struct PlotOptions {
  XColumn x = XColumn::kIndex;
  std::string title;
  int width = 720;
  int height = 440;
};

// Throws ConfigError when the curves disagree on the x axis or y quantity.
std::string render_svg(const std::vector<Curve>& curves, const PlotOptions& options);

// Label for an aggregate file: its stem without a trailing "_aggregate".
std::string curve_label(const std::string& path);

}  // namespace gas
