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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "shuttle/nn/kernels.hpp"
#include "shuttle/rng.hpp"

using namespace shuttle;
namespace k = shuttle::nn::kernels;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(Kernels, ScalarAlwaysAvailable) {
  const auto all = k::available();
  ASSERT_FALSE(all.empty());
  EXPECT_STREQ(all.front()->name, "scalar");
  EXPECT_NE(k::active().name, nullptr);
}

TEST(Kernels, BackendsAgreeWithScalar) {
  const k::KernelTable& ref = k::scalar();
  Rng rng(42);
  for (const k::KernelTable* t : k::available()) {
    SCOPED_TRACE(t->name);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 17u, 64u, 95u, 486u, 1001u}) {
      const auto a = random_vec(rng, n);
      const auto b = random_vec(rng, n);
      const double d_ref = ref.dot(a.data(), b.data(), n);
      EXPECT_NEAR(t->dot(a.data(), b.data(), n), d_ref, 1e-12 * (1.0 + static_cast<double>(n)));

      auto y1 = b, y2 = b;
      ref.axpy(0.37, a.data(), y1.data(), n);
      t->axpy(0.37, a.data(), y2.data(), n);
      EXPECT_TRUE(bit_equal(y1, y2));

      auto l1 = b, l2 = b;
      ref.lerp(0.005, a.data(), l1.data(), n);
      t->lerp(0.005, a.data(), l2.data(), n);
      EXPECT_TRUE(bit_equal(l1, l2));

      auto v1 = random_vec(rng, n), p1 = random_vec(rng, n);
      auto v2 = v1, p2 = p1;
      ref.momentum_step(0.01, 0.9, a.data(), v1.data(), p1.data(), n);
      t->momentum_step(0.01, 0.9, a.data(), v2.data(), p2.data(), n);
      EXPECT_TRUE(bit_equal(v1, v2));
      EXPECT_TRUE(bit_equal(p1, p2));

      const k::AdamParams hp{1e-3, 0.9, 0.999, 1e-8, 1 - 0.9 * 0.9, 1 - 0.999 * 0.999};
      auto m1 = random_vec(rng, n), s1 = random_vec(rng, n), q1 = random_vec(rng, n);
      for (double& x : s1) x = std::abs(x);
      auto m2 = m1, s2 = s1, q2 = q1;
      ref.adam_step(hp, a.data(), m1.data(), s1.data(), q1.data(), n);
      t->adam_step(hp, a.data(), m2.data(), s2.data(), q2.data(), n);
      EXPECT_TRUE(bit_equal(m1, m2));
      EXPECT_TRUE(bit_equal(s1, s2));
      EXPECT_TRUE(bit_equal(q1, q2));
    }
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{1, 1}, {5, 3}, {64, 95}, {486, 64}, {13, 130}}) {
      const auto w = random_vec(rng, rows * cols);
      const auto x = random_vec(rng, cols);
      const auto bias = random_vec(rng, rows);
      std::vector<double> y1(rows), y2(rows);
      ref.gemv(w.data(), x.data(), bias.data(), y1.data(), rows, cols);
      t->gemv(w.data(), x.data(), bias.data(), y2.data(), rows, cols);
      for (std::size_t i = 0; i < rows; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-12 * static_cast<double>(cols));

      const auto g = random_vec(rng, rows);
      auto o1 = random_vec(rng, cols);
      auto o2 = o1;
      ref.gemv_t_acc(w.data(), g.data(), o1.data(), rows, cols);
      t->gemv_t_acc(w.data(), g.data(), o2.data(), rows, cols);
      for (std::size_t i = 0; i < cols; ++i) EXPECT_NEAR(o1[i], o2[i], 1e-12 * static_cast<double>(rows));

      auto dw1 = random_vec(rng, rows * cols);
      auto dw2 = dw1;
      ref.ger_acc(g.data(), x.data(), dw1.data(), rows, cols);
      t->ger_acc(g.data(), x.data(), dw2.data(), rows, cols);
      EXPECT_TRUE(bit_equal(dw1, dw2));
    }
  }
}

TEST(Kernels, SelectByName) {
  const std::string before = k::active().name;
  k::select("scalar");
  EXPECT_STREQ(k::active().name, "scalar");
  EXPECT_THROW(k::select("sse9"), std::exception);
  k::select(before);
}
