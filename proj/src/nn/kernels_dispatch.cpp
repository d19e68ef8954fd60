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

#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "shuttle/error.hpp"

namespace shuttle::nn::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* find(std::string_view name) {
  for (const KernelTable* t : available()) {
    if (name == t->name) return t;
  }
  return nullptr;
}

const KernelTable* initial() {
  if (const char* env = std::getenv("SHUTTLE_KERNELS"); env && *env) {
    if (const KernelTable* t = find(env)) return t;
  }
  const auto all = available();
  return all.back();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial()};
  return table;
}

}  // namespace

const KernelTable* avx2() { return cpu_has_avx2() ? detail::avx2_table() : nullptr; }

// NEON is mandatory on AArch64, so compiled-in means usable.
const KernelTable* neon() { return detail::neon_table(); }

std::vector<const KernelTable*> available() {
  std::vector<const KernelTable*> out{&scalar()};
  if (const KernelTable* t = avx2()) out.push_back(t);
  if (const KernelTable* t = neon()) out.push_back(t);
  return out;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select(std::string_view name) {
  const KernelTable* t = find(name);
  if (!t) throw NotFoundError("kernel backend '" + std::string(name) + "' is not available");
  current().store(t, std::memory_order_release);
}

}  // namespace shuttle::nn::kernels
