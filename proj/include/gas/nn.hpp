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

// Minimal dense network engine: fixed MLP topology, manual backprop, Adam.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gas::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

enum class Activation : std::uint8_t { kIdentity = 0, kRelu = 1 };

template <typename T>
struct Layer {
  Matrix<T> weight;  // out x in
  Vector<T> bias;    // out
  Activation activation = Activation::kIdentity;

  int in() const { return static_cast<int>(weight.cols()); }
  int out() const { return static_cast<int>(weight.rows()); }
};

template <typename T>
struct LayerGradient {
  Matrix<T> weight;
  Vector<T> bias;
};

template <typename T>
using Gradients = std::vector<LayerGradient<T>>;

// Fully-connected network. Batches are row-major in the mathematical sense:
// one sample per row, so forward maps B x in to B x out.
//
// forward() caches the activations needed by backward(); predict() is the
// cache-free const variant used by actors and target networks.
template <typename T>
class DenseNet {
 public:
  DenseNet() = default;

  // widths = {in, h1, ..., out}. Hidden layers use `hidden`, the last layer
  // uses `output`. The last layer's weights are multiplied by final_scale.
  DenseNet(std::span<const int> widths, Activation hidden, Activation output,
           std::mt19937_64& rng, double final_scale = 1.0);

  // Throws ConfigError unless consecutive layer dimensions chain.
  explicit DenseNet(std::vector<Layer<T>> layers);

  Matrix<T> forward(const Matrix<T>& batch);
  Matrix<T> predict(const Matrix<T>& batch) const;

  // Gradients of a scalar loss given dL/d(output). If grad_input is non-null
  // it receives dL/d(input). Consumes the cache of the last forward().
  Gradients<T> backward(const Matrix<T>& grad_output,
                        Matrix<T>* grad_input = nullptr);

  bool has_cache() const { return !cache_inputs_.empty(); }
  void clear_cache();

  int input_width() const;
  int output_width() const;
  std::size_t parameter_count() const;

  const std::vector<Layer<T>>& layers() const { return layers_; }
  std::vector<Layer<T>>& layers() { return layers_; }

  Gradients<T> zero_gradients() const;

  // Copies parameters only, never the activation cache.
  DenseNet snapshot() const;
  void load_snapshot(const DenseNet& source);

  // Element-wise parameter equality.
  bool same_parameters(const DenseNet& other) const;

  template <typename U>
  DenseNet<U> cast() const {
    std::vector<Layer<U>> out;
    for (const auto& l : layers_) {
      out.push_back({l.weight.template cast<U>(), l.bias.template cast<U>(),
                     l.activation});
    }
    return DenseNet<U>(std::move(out));
  }

 private:
  void check_input(const Matrix<T>& batch) const;

  std::vector<Layer<T>> layers_;
  std::vector<Matrix<T>> cache_inputs_;   // input to layer i
  std::vector<Matrix<T>> cache_outputs_;  // post-activation output of layer i
};

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-4;
};

template <typename T>
struct AdamState {
  std::vector<LayerGradient<T>> first_moment;
  std::vector<LayerGradient<T>> second_moment;
  std::int64_t step = 0;
};

// Adam over any number of networks that are updated together.
template <typename T>
class Adam {
 public:
  Adam() = default;
  Adam(AdamConfig config, std::span<DenseNet<T>* const> nets);

  // One bias-corrected update. All gradients are checked for finiteness
  // before anything is touched; on failure throws NumericError and leaves
  // parameters and moments unchanged.
  void step(std::span<DenseNet<T>* const> nets,
            std::span<const Gradients<T>> grads);

  const AdamConfig& config() const { return config_; }
  std::int64_t step_count() const { return step_; }
  const std::vector<AdamState<T>>& states() const { return states_; }

 private:
  AdamConfig config_;
  std::vector<AdamState<T>> states_;
  std::int64_t step_ = 0;
};

// Flat binary format: "GASNN1", u32 layer count, per layer (u32 in, u32 out,
// u8 activation), then for each layer little-endian float32 weights (row
// major, out x in) followed by biases.
template <typename T>
void save(const DenseNet<T>& net, std::ostream& out);
template <typename T>
DenseNet<T> load(std::istream& in);

extern template class DenseNet<float>;
extern template class DenseNet<double>;
extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace gas::nn
