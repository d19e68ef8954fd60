// Copyright 2026 The Shuttle Authors.
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

#include "shuttle/nn/network.hpp"

#include <cmath>

#include "shuttle/error.hpp"
#include "shuttle/nn/kernels.hpp"

namespace shuttle::nn {

Network::Network(int input_dim, std::vector<int> hidden, std::vector<int> head_dims)
    : input_dim_(input_dim), hidden_(std::move(hidden)), head_dims_(std::move(head_dims)) {
  if (input_dim_ < 1) throw RangeError("network input_dim must be >= 1");
  std::size_t offset = 0;
  auto add = [&offset](int in, int out) {
    if (out < 1) throw RangeError("layer width must be >= 1");
    LayerView v{in, out, offset, offset + static_cast<std::size_t>(in) * out};
    offset = v.b_offset + static_cast<std::size_t>(out);
    return v;
  };
  int prev = input_dim_;
  for (int h : hidden_) {
    trunk_.push_back(add(prev, h));
    prev = h;
  }
  for (int d : head_dims_) heads_.push_back(add(prev, d));
  params_.assign(offset, 0.0);
}

void Network::init(Rng& rng, std::span<const double> head_scales) {
  auto fill = [&](const LayerView& l, double scale) {
    const double limit = scale * std::sqrt(6.0 / (l.in + l.out));
    for (std::size_t i = 0; i < static_cast<std::size_t>(l.in) * l.out; ++i) {
      params_[l.w_offset + i] = (2.0 * rng.uniform() - 1.0) * limit;
    }
    for (int i = 0; i < l.out; ++i) params_[l.b_offset + i] = 0.0;
  };
  for (const auto& l : trunk_) fill(l, 1.0);
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    fill(heads_[h], h < head_scales.size() ? head_scales[h] : 1.0);
  }
}

bool Network::all_finite() const {
  for (double v : params_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Json Network::to_json() const {
  return Json{{"input_dim", input_dim_}, {"hidden", hidden_}, {"heads", head_dims_}, {"params", params_}};
}

Network Network::from_json(const Json& j) {
  Network net(j.at("input_dim").get<int>(), j.at("hidden").get<std::vector<int>>(),
              j.at("heads").get<std::vector<int>>());
  const auto& params = j.at("params");
  if (!params.is_array() || params.size() != net.params_.size()) {
    throw ValidationError("network parameter count does not match its shape");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].is_number()) throw ValidationError("non-numeric network parameter");
    net.params_[i] = params[i].get<double>();
  }
  if (!net.all_finite()) throw ValidationError("network has non-finite parameters");
  return net;
}

bool Network::same_shape(const Network& other) const {
  return input_dim_ == other.input_dim_ && hidden_ == other.hidden_ && head_dims_ == other.head_dims_;
}

void forward(const Network& net, std::span<const double> inputs, int batch, ForwardCache& cache) {
  const auto in_dim = static_cast<std::size_t>(net.input_dim());
  if (batch < 1 || inputs.size() != in_dim * static_cast<std::size_t>(batch)) {
    throw ValidationError("network input has dimension " + std::to_string(inputs.size()) +
                          ", expected " + std::to_string(in_dim) + " x " + std::to_string(batch));
  }
  const auto& k = kernels::active();
  const auto p = net.params();
  cache.batch = batch;
  cache.activations.resize(net.num_trunk_layers() + 1);
  cache.activations[0].assign(inputs.begin(), inputs.end());

  for (std::size_t l = 0; l < net.num_trunk_layers(); ++l) {
    const LayerView& layer = net.trunk_layer(l);
    const auto& x = cache.activations[l];
    auto& y = cache.activations[l + 1];
    y.resize(static_cast<std::size_t>(batch) * layer.out);
    for (int b = 0; b < batch; ++b) {
      double* yb = y.data() + static_cast<std::size_t>(b) * layer.out;
      k.gemv(p.data() + layer.w_offset, x.data() + static_cast<std::size_t>(b) * layer.in,
             p.data() + layer.b_offset, yb, layer.out, layer.in);
      for (int o = 0; o < layer.out; ++o) yb[o] = std::tanh(yb[o]);
    }
  }

  const auto& feat = cache.activations.back();
  cache.heads.resize(net.num_heads());
  for (std::size_t h = 0; h < net.num_heads(); ++h) {
    const LayerView& layer = net.head_layer(h);
    auto& y = cache.heads[h];
    y.resize(static_cast<std::size_t>(batch) * layer.out);
    for (int b = 0; b < batch; ++b) {
      k.gemv(p.data() + layer.w_offset, feat.data() + static_cast<std::size_t>(b) * layer.in,
             p.data() + layer.b_offset, y.data() + static_cast<std::size_t>(b) * layer.out, layer.out,
             layer.in);
    }
  }
}

void backward(const Network& net, const ForwardCache& cache,
              const std::vector<std::vector<double>>& head_grads, std::span<double> grad) {
  if (grad.size() != net.num_params()) throw ValidationError("gradient buffer has the wrong size");
  if (head_grads.size() != net.num_heads()) throw ValidationError("one gradient per head expected");
  const auto& k = kernels::active();
  const auto p = net.params();
  const int batch = cache.batch;
  const int feat_dim = net.feature_dim();

  // delta = d(loss)/d(trunk output), batch x feat_dim
  std::vector<double> delta(static_cast<std::size_t>(batch) * feat_dim, 0.0);
  const auto& feat = cache.activations.back();
  for (std::size_t h = 0; h < net.num_heads(); ++h) {
    const auto& g = head_grads[h];
    if (g.empty()) continue;
    const LayerView& layer = net.head_layer(h);
    if (g.size() != static_cast<std::size_t>(batch) * layer.out) {
      throw ValidationError("head gradient has the wrong size");
    }
    for (int b = 0; b < batch; ++b) {
      const double* gb = g.data() + static_cast<std::size_t>(b) * layer.out;
      const double* xb = feat.data() + static_cast<std::size_t>(b) * layer.in;
      k.ger_acc(gb, xb, grad.data() + layer.w_offset, layer.out, layer.in);
      k.axpy(1.0, gb, grad.data() + layer.b_offset, layer.out);
      k.gemv_t_acc(p.data() + layer.w_offset, gb, delta.data() + static_cast<std::size_t>(b) * feat_dim,
                   layer.out, layer.in);
    }
  }

  for (std::size_t l = net.num_trunk_layers(); l-- > 0;) {
    const LayerView& layer = net.trunk_layer(l);
    const auto& y = cache.activations[l + 1];
    const auto& x = cache.activations[l];
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= 1.0 - y[i] * y[i];
    std::vector<double> prev;
    if (l > 0) prev.assign(static_cast<std::size_t>(batch) * layer.in, 0.0);
    for (int b = 0; b < batch; ++b) {
      const double* db = delta.data() + static_cast<std::size_t>(b) * layer.out;
      k.ger_acc(db, x.data() + static_cast<std::size_t>(b) * layer.in, grad.data() + layer.w_offset,
                layer.out, layer.in);
      k.axpy(1.0, db, grad.data() + layer.b_offset, layer.out);
      if (l > 0) {
        k.gemv_t_acc(p.data() + layer.w_offset, db, prev.data() + static_cast<std::size_t>(b) * layer.in,
                     layer.out, layer.in);
      }
    }
    delta = std::move(prev);
  }
}

}  // namespace shuttle::nn
