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

#include "gas/nn.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "gas/errors.hpp"

namespace gas::nn {

namespace {

template <typename T>
void apply_activation(Matrix<T>& z, Activation act) {
  if (act == Activation::kRelu) z = z.cwiseMax(T(0));
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw ConfigError("network file truncated");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void write_f32(std::ostream& out, float f) {
  write_u32(out, std::bit_cast<std::uint32_t>(f));
}

float read_f32(std::istream& in) { return std::bit_cast<float>(read_u32(in)); }

constexpr char kMagic[6] = {'G', 'A', 'S', 'N', 'N', '1'};

}  // namespace

template <typename T>
DenseNet<T>::DenseNet(std::span<const int> widths, Activation hidden,
                      Activation output, std::mt19937_64& rng,
                      double final_scale) {
  if (widths.size() < 2) throw ConfigError("DenseNet needs at least 2 widths");
  for (int w : widths) {
    if (w <= 0) throw ConfigError("DenseNet widths must be positive");
  }
  const std::size_t n = widths.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    Layer<T> layer;
    layer.activation = (i + 1 == n) ? output : hidden;
    const int fan_in = widths[i];
    // He-uniform for relu layers, fan-in uniform otherwise.
    const double limit = layer.activation == Activation::kRelu
                             ? std::sqrt(6.0 / fan_in)
                             : std::sqrt(1.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    layer.weight.resize(widths[i + 1], fan_in);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
        layer.weight(r, c) = static_cast<T>(dist(rng));
      }
    }
    if (i + 1 == n) layer.weight *= static_cast<T>(final_scale);
    layer.bias = Vector<T>::Zero(widths[i + 1]);
    layers_.push_back(std::move(layer));
  }
}

template <typename T>
DenseNet<T>::DenseNet(std::vector<Layer<T>> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("DenseNet needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].bias.size() != layers_[i].weight.rows()) {
      throw ConfigError("layer " + std::to_string(i) + ": bias size mismatch");
    }
    if (i > 0 && layers_[i].in() != layers_[i - 1].out()) {
      throw ConfigError("layer " + std::to_string(i) +
                        ": input width does not chain with previous output");
    }
  }
}

template <typename T>
void DenseNet<T>::check_input(const Matrix<T>& batch) const {
  if (layers_.empty()) throw ConfigError("forward on an empty network");
  if (batch.cols() != input_width()) {
    throw ConfigError("batch width " + std::to_string(batch.cols()) +
                      " != network input width " +
                      std::to_string(input_width()));
  }
}

template <typename T>
Matrix<T> DenseNet<T>::forward(const Matrix<T>& batch) {
  check_input(batch);
  cache_inputs_.clear();
  cache_outputs_.clear();
  Matrix<T> x = batch;
  for (const auto& layer : layers_) {
    Matrix<T> z = x * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    apply_activation(z, layer.activation);
    cache_inputs_.push_back(std::move(x));
    x = z;
    cache_outputs_.push_back(std::move(z));
  }
  return x;
}

template <typename T>
Matrix<T> DenseNet<T>::predict(const Matrix<T>& batch) const {
  check_input(batch);
  Matrix<T> x = batch;
  for (const auto& layer : layers_) {
    Matrix<T> z = x * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    apply_activation(z, layer.activation);
    x = std::move(z);
  }
  return x;
}

template <typename T>
Gradients<T> DenseNet<T>::backward(const Matrix<T>& grad_output,
                                   Matrix<T>* grad_input) {
  if (!has_cache()) throw UsageError("backward() without a cached forward()");
  const Eigen::Index batch = cache_inputs_.front().rows();
  if (grad_output.rows() != batch || grad_output.cols() != output_width()) {
    throw ConfigError("output gradient shape does not match cached forward");
  }
  Gradients<T> grads(layers_.size());
  Matrix<T> g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const auto& layer = layers_[i];
    if (layer.activation == Activation::kRelu) {
      g = (cache_outputs_[i].array() > T(0)).select(g, T(0));
    }
    grads[i].weight = g.transpose() * cache_inputs_[i];
    grads[i].bias = g.colwise().sum().transpose();
    if (i > 0 || grad_input != nullptr) g = g * layer.weight;
  }
  if (grad_input != nullptr) *grad_input = std::move(g);
  clear_cache();
  return grads;
}

template <typename T>
void DenseNet<T>::clear_cache() {
  cache_inputs_.clear();
  cache_outputs_.clear();
}

template <typename T>
int DenseNet<T>::input_width() const {
  return layers_.empty() ? 0 : layers_.front().in();
}

template <typename T>
int DenseNet<T>::output_width() const {
  return layers_.empty() ? 0 : layers_.back().out();
}

template <typename T>
std::size_t DenseNet<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

template <typename T>
Gradients<T> DenseNet<T>::zero_gradients() const {
  Gradients<T> g(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    g[i].weight = Matrix<T>::Zero(layers_[i].out(), layers_[i].in());
    g[i].bias = Vector<T>::Zero(layers_[i].out());
  }
  return g;
}

template <typename T>
DenseNet<T> DenseNet<T>::snapshot() const {
  DenseNet copy;
  copy.layers_ = layers_;
  return copy;
}

template <typename T>
void DenseNet<T>::load_snapshot(const DenseNet& source) {
  layers_ = source.layers_;
  clear_cache();
}

template <typename T>
bool DenseNet<T>::same_parameters(const DenseNet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.activation != b.activation || a.weight.rows() != b.weight.rows() ||
        a.weight.cols() != b.weight.cols() || a.weight != b.weight ||
        a.bias != b.bias) {
      return false;
    }
  }
  return true;
}

template <typename T>
Adam<T>::Adam(AdamConfig config, std::span<DenseNet<T>* const> nets)
    : config_(config) {
  for (const auto* net : nets) {
    AdamState<T> s;
    s.first_moment = net->zero_gradients();
    s.second_moment = net->zero_gradients();
    states_.push_back(std::move(s));
  }
}

template <typename T>
void Adam<T>::step(std::span<DenseNet<T>* const> nets,
                   std::span<const Gradients<T>> grads) {
  if (nets.size() != states_.size() || grads.size() != states_.size()) {
    throw ConfigError("Adam: network/gradient count mismatch");
  }
  for (std::size_t n = 0; n < nets.size(); ++n) {
    const auto& layers = nets[n]->layers();
    if (grads[n].size() != layers.size()) {
      throw ConfigError("Adam: layer count mismatch");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (grads[n][i].weight.rows() != layers[i].weight.rows() ||
          grads[n][i].weight.cols() != layers[i].weight.cols() ||
          grads[n][i].bias.size() != layers[i].bias.size()) {
        throw ConfigError("Adam: gradient shape mismatch");
      }
      if (!grads[n][i].weight.allFinite() || !grads[n][i].bias.allFinite()) {
        throw NumericError("Adam: non-finite gradient in network " +
                           std::to_string(n) + " layer " + std::to_string(i) +
                           "; update aborted");
      }
    }
  }

  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const T lr = static_cast<T>(config_.learning_rate);
  const T eps = static_cast<T>(config_.epsilon);

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = T(b1) * m + T(1 - b1) * g;
    v = T(b2) * v + T(1 - b2) * g.cwiseProduct(g);
    auto m_hat = m.array() / T(c1);
    auto v_hat = v.array() / T(c2);
    param.array() -= lr * m_hat / (v_hat.sqrt() + eps);
  };

  for (std::size_t n = 0; n < nets.size(); ++n) {
    auto& layers = nets[n]->layers();
    auto& st = states_[n];
    st.step = step_;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      update(layers[i].weight, st.first_moment[i].weight,
             st.second_moment[i].weight, grads[n][i].weight);
      update(layers[i].bias, st.first_moment[i].bias, st.second_moment[i].bias,
             grads[n][i].bias);
    }
  }
}

template <typename T>
void save(const DenseNet<T>& net, std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  const auto& layers = net.layers();
  write_u32(out, static_cast<std::uint32_t>(layers.size()));
  for (const auto& l : layers) {
    write_u32(out, static_cast<std::uint32_t>(l.in()));
    write_u32(out, static_cast<std::uint32_t>(l.out()));
    const auto act = static_cast<char>(l.activation);
    out.write(&act, 1);
  }
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        write_f32(out, static_cast<float>(l.weight(r, c)));
      }
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
      write_f32(out, static_cast<float>(l.bias(r)));
    }
  }
  if (!out) throw ConfigError("failed writing network");
}

template <typename T>
DenseNet<T> load(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ConfigError("not a GASNN1 network file");
  }
  const std::uint32_t count = read_u32(in);
  if (count == 0 || count > 1024) throw ConfigError("bad layer count");
  std::vector<Layer<T>> layers(count);
  for (auto& l : layers) {
    const auto fan_in = read_u32(in);
    const auto fan_out = read_u32(in);
    char act = 0;
    if (!in.read(&act, 1)) throw ConfigError("network file truncated");
    if (act != 0 && act != 1) throw ConfigError("bad activation code");
    l.activation = static_cast<Activation>(act);
    l.weight.resize(fan_out, fan_in);
    l.bias.resize(fan_out);
  }
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        l.weight(r, c) = static_cast<T>(read_f32(in));
      }
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
      l.bias(r) = static_cast<T>(read_f32(in));
    }
  }
  return DenseNet<T>(std::move(layers));
}

template class DenseNet<float>;
template class DenseNet<double>;
template class Adam<float>;
template class Adam<double>;
template void save<float>(const DenseNet<float>&, std::ostream&);
template void save<double>(const DenseNet<double>&, std::ostream&);
template DenseNet<float> load<float>(std::istream&);
template DenseNet<double> load<double>(std::istream&);

}  // namespace gas::nn
