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

#include <cmath>

#include "kernels_impl.hpp"

namespace shuttle::nn::kernels {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void lerp(double tau, const double* src, double* dst, std::size_t n) {
  const double keep = 1.0 - tau;
  for (std::size_t i = 0; i < n; ++i) dst[i] = tau * src[i] + keep * dst[i];
}

void momentum_step(double lr, double mu, const double* g, double* v, double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = mu * v[i] + g[i];
    p[i] -= lr * v[i];
  }
}

void adam_step(const AdamParams& hp, const double* g, double* m, double* v, double* p, std::size_t n) {
  const double one_m_b1 = 1.0 - hp.beta1;
  const double one_m_b2 = 1.0 - hp.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = hp.beta1 * m[i] + one_m_b1 * g[i];
    v[i] = hp.beta2 * v[i] + one_m_b2 * (g[i] * g[i]);
    const double m_hat = m[i] / hp.bias_correction1;
    const double v_hat = v[i] / hp.bias_correction2;
    p[i] -= hp.lr * m_hat / (std::sqrt(v_hat) + hp.eps);
  }
}

void gemv(const double* w, const double* x, const double* b, double* y, std::size_t rows,
          std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = b[r] + dot(w + r * cols, x, cols);
}

void gemv_t_acc(const double* w, const double* g, double* out, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(g[r], w + r * cols, out, cols);
}

void ger_acc(const double* g, const double* x, double* dw, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(g[r], x, dw + r * cols, cols);
}

constexpr KernelTable kScalar{"scalar", dot, axpy, lerp, momentum_step, adam_step,
                              gemv, gemv_t_acc, ger_acc};

}  // namespace

const KernelTable& scalar() { return kScalar; }

}  // namespace shuttle::nn::kernels
