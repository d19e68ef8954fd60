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

// Dense double-precision inner loops used by the MLP and its optimizers.
//
// Every backend implements the same table. Elementwise kernels (axpy, lerp,
// optimizer steps) perform the same IEEE operations in the same order as the
// scalar reference and are bit-identical to it. Reductions (dot, gemv) sum
// in lane-parallel order and agree with the scalar reference to rounding.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace shuttle::nn::kernels {

struct AdamParams {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // dst = tau * src + (1 - tau) * dst
  void (*lerp)(double tau, const double* src, double* dst, std::size_t n);
  // v = mu * v + g; p -= lr * v
  void (*momentum_step)(double lr, double mu, const double* g, double* v, double* p, std::size_t n);
  void (*adam_step)(const AdamParams& hp, const double* g, double* m, double* v, double* p,
                    std::size_t n);

  // y[r] = b[r] + dot(W[r, :], x); W is rows x cols, row-major.
  void (*gemv)(const double* w, const double* x, const double* b, double* y, std::size_t rows,
               std::size_t cols);
  // out += W^T g
  void (*gemv_t_acc)(const double* w, const double* g, double* out, std::size_t rows, std::size_t cols);
  // dw += g x^T
  void (*ger_acc)(const double* g, const double* x, double* dw, std::size_t rows, std::size_t cols);
};

const KernelTable& scalar();
// nullptr when the backend was not compiled in or the CPU lacks the ISA.
const KernelTable* avx2();
const KernelTable* neon();

// Backends usable on this machine, reference first.
std::vector<const KernelTable*> available();

// The dispatched table: best available backend, unless SHUTTLE_KERNELS names
// one ("scalar", "avx2", "neon") or select() was called.
const KernelTable& active();
void select(std::string_view name);

}  // namespace shuttle::nn::kernels
