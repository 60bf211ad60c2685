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

// Central finite differences over every parameter of a set of networks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gas/nn.hpp"

namespace gas::testing {

struct GradCheck {
  double max_relative_error = 0.0;
  std::size_t parameters = 0;
};

// Relative error |a - n| / max(|a|, |n|, floor); the floor keeps parameters
// with a vanishing gradient from dominating.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

// `loss` must recompute the scalar loss from scratch with the current
// parameters; `grads[n][l]` are the analytic gradients for nets[n] layer l.
inline GradCheck check_gradients(const std::vector<nn::DenseNet<double>*>& nets,
                                 const std::vector<nn::Gradients<double>>& grads,
                                 const std::function<double()>& loss, double h = 1e-5) {
  GradCheck out;
  auto probe = [&](double& p, double analytic) {
    const double keep = p;
    p = keep + h;
    const double up = loss();
    p = keep - h;
    const double down = loss();
    p = keep;
    out.max_relative_error =
        std::max(out.max_relative_error, relative_error(analytic, (up - down) / (2 * h)));
    ++out.parameters;
  };
  for (std::size_t n = 0; n < nets.size(); ++n) {
    auto& layers = nets[n]->layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& w = layers[l].weight;
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) probe(w(i, j), grads[n][l].weight(i, j));
      }
      auto& b = layers[l].bias;
      for (Eigen::Index i = 0; i < b.size(); ++i) probe(b(i), grads[n][l].bias(i));
    }
  }
  return out;
}

}  // namespace gas::testing
