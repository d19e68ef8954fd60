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

#include "kernels_impl.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <cmath>

namespace shuttle::nn::kernels {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void lerp(double tau, const double* src, double* dst, std::size_t n) {
  const double keep = 1.0 - tau;
  const float64x2_t vt = vdupq_n_f64(tau);
  const float64x2_t vk = vdupq_n_f64(keep);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vaddq_f64(vmulq_f64(vt, vld1q_f64(src + i)), vmulq_f64(vk, vld1q_f64(dst + i))));
  }
  for (; i < n; ++i) dst[i] = tau * src[i] + keep * dst[i];
}

void momentum_step(double lr, double mu, const double* g, double* v, double* p, std::size_t n) {
  const float64x2_t vmu = vdupq_n_f64(mu);
  const float64x2_t vlr = vdupq_n_f64(lr);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vel = vaddq_f64(vmulq_f64(vmu, vld1q_f64(v + i)), vld1q_f64(g + i));
    vst1q_f64(v + i, vel);
    vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), vmulq_f64(vlr, vel)));
  }
  for (; i < n; ++i) {
    v[i] = mu * v[i] + g[i];
    p[i] -= lr * v[i];
  }
}

void adam_step(const AdamParams& hp, const double* g, double* m, double* v, double* p, std::size_t n) {
  const double one_m_b1 = 1.0 - hp.beta1;
  const double one_m_b2 = 1.0 - hp.beta2;
  const float64x2_t b1 = vdupq_n_f64(hp.beta1);
  const float64x2_t b2 = vdupq_n_f64(hp.beta2);
  const float64x2_t c1 = vdupq_n_f64(one_m_b1);
  const float64x2_t c2 = vdupq_n_f64(one_m_b2);
  const float64x2_t bc1 = vdupq_n_f64(hp.bias_correction1);
  const float64x2_t bc2 = vdupq_n_f64(hp.bias_correction2);
  const float64x2_t lr = vdupq_n_f64(hp.lr);
  const float64x2_t eps = vdupq_n_f64(hp.eps);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t gi = vld1q_f64(g + i);
    const float64x2_t mi = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(c1, gi));
    const float64x2_t vi = vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)), vmulq_f64(c2, vmulq_f64(gi, gi)));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    const float64x2_t m_hat = vdivq_f64(mi, bc1);
    const float64x2_t v_hat = vdivq_f64(vi, bc2);
    const float64x2_t step = vdivq_f64(vmulq_f64(lr, m_hat), vaddq_f64(vsqrtq_f64(v_hat), eps));
    vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), step));
  }
  for (; i < n; ++i) {
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

constexpr KernelTable kNeon{"neon", dot, axpy, lerp, momentum_step, adam_step,
                            gemv, gemv_t_acc, ger_acc};

}  // namespace

namespace detail {
const KernelTable* neon_table() { return &kNeon; }
}  // namespace detail

}  // namespace shuttle::nn::kernels

#else

namespace shuttle::nn::kernels::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace shuttle::nn::kernels::detail

#endif
