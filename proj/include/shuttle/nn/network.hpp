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

#pragma once

// Fully connected network with a tanh trunk and any number of linear heads
// reading the last trunk activation. All parameters live in one flat vector
// so optimizers, target-network averaging and finite differences operate on
// a single span.

#include <cstddef>
#include <span>
#include <vector>

#include "shuttle/domain.hpp"
#include "shuttle/rng.hpp"

namespace shuttle::nn {

struct LayerView {
  int in = 0;
  int out = 0;
  std::size_t w_offset = 0;  // out x in, row-major
  std::size_t b_offset = 0;
  friend bool operator==(const LayerView&, const LayerView&) = default;
};

class Network {
 public:
  Network() = default;
  Network(int input_dim, std::vector<int> hidden, std::vector<int> head_dims);

  int input_dim() const { return input_dim_; }
  const std::vector<int>& hidden() const { return hidden_; }
  const std::vector<int>& head_dims() const { return head_dims_; }
  int feature_dim() const { return hidden_.empty() ? input_dim_ : hidden_.back(); }

  const LayerView& trunk_layer(std::size_t i) const { return trunk_[i]; }
  const LayerView& head_layer(std::size_t h) const { return heads_[h]; }
  std::size_t num_trunk_layers() const { return trunk_.size(); }
  std::size_t num_heads() const { return heads_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t num_params() const { return params_.size(); }

  // Glorot-uniform trunk; heads uniform in +-head_scale*glorot; biases zero.
  void init(Rng& rng, std::span<const double> head_scales);
  bool all_finite() const;

  Json to_json() const;
  static Network from_json(const Json& j);
  bool same_shape(const Network& other) const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  int input_dim_ = 0;
  std::vector<int> hidden_;
  std::vector<int> head_dims_;
  std::vector<LayerView> trunk_;
  std::vector<LayerView> heads_;
  std::vector<double> params_;
};

// Per-batch activations kept for the backward pass. Row-major, batch-major.
struct ForwardCache {
  int batch = 0;
  std::vector<std::vector<double>> activations;  // [0] = input, [l+1] = tanh output of layer l
  std::vector<std::vector<double>> heads;        // [h] = batch x head_dims[h]

  std::span<const double> head_row(std::size_t h, int b, int dim) const {
    return std::span<const double>(heads[h]).subspan(static_cast<std::size_t>(b) * dim, dim);
  }
};

void forward(const Network& net, std::span<const double> inputs, int batch, ForwardCache& cache);

// Accumulates d(loss)/d(params) into grad (size num_params). head_grads[h]
// holds d(loss)/d(head h output), batch x dim; an empty vector means head h
// does not contribute.
void backward(const Network& net, const ForwardCache& cache,
              const std::vector<std::vector<double>>& head_grads, std::span<double> grad);

}  // namespace shuttle::nn
