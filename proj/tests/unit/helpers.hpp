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

#include <filesystem>
#include <string>
#include <vector>

#include "shuttle/dataset.hpp"
#include "shuttle/rng.hpp"

namespace shuttle::testing {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("shuttle_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

template <std::size_t N>
void fill(std::array<double, N>& a, Rng& rng, double lo, double hi) {
  for (double& v : a) v = uniform_in(rng, lo, hi);
}

inline PlayerDynamics random_dynamics(Rng& rng) {
  PlayerDynamics d;
  fill(d.succ_shot, rng, -3, 4);
  fill(d.succ_height, rng, -1, 1);
  fill(d.succ_zone, rng, -1, 1);
  d.succ_backhand = uniform_in(rng, -2, 1);
  d.succ_around_head = uniform_in(rng, -2, 1);
  fill(d.succ_incoming, rng, -1, 1);
  fill(d.ret_shot, rng, -3, 4);
  fill(d.ret_height, rng, -1, 1);
  fill(d.ret_zone, rng, -1, 1);
  d.ret_backhand = uniform_in(rng, -1, 1);
  d.ret_around_head = uniform_in(rng, -1, 1);
  for (auto& row : d.pref_shot) fill(row, rng, -3, 3);
  for (auto& row : d.pref_shot_by_height) fill(row, rng, -1, 1);
  for (auto& row : d.pref_row) fill(row, rng, -2, 2);
  fill(d.pref_col, rng, -1, 1);
  for (auto& row : d.pref_height) fill(row, rng, -2, 2);
  fill(d.pref_exec, rng, -2, 1);
  return d;
}

inline GroundTruthConfig random_ground_truth(Rng& rng) {
  GroundTruthConfig c;
  c.name = "random";
  c.players = {random_dynamics(rng), random_dynamics(rng)};
  c.seed = rng.next_u64();
  return c;
}

inline ShotRecord shot(int index, PlayerId actor, int action, bool last_fault = false, bool last_missed = false) {
  ShotRecord s;
  s.match_id = "m";
  s.rally_id = 0;
  s.shot_index = index;
  s.actor = actor;
  s.action = decode_action(action);
  if (last_fault) {
    s.exec_result = ExecResult::Fault;
  } else {
    s.defense_result = last_missed ? DefenseResult::Missed : DefenseResult::Returned;
  }
  return s;
}

// n-shot rally served by P0; ends with a fault (fault=true) or a winner.
inline RallyRecord rally(int n, bool fault, int rally_id = 0) {
  RallyRecord r;
  r.match_id = "m";
  r.rally_id = rally_id;
  r.server = PlayerId::P0;
  for (int i = 0; i < n; ++i) {
    const PlayerId actor = i % 2 ? PlayerId::P1 : PlayerId::P0;
    const bool last = i == n - 1;
    r.shots.push_back(shot(i, actor, (i * 37) % kNumActions, last && fault, last && !fault));
    r.shots.back().rally_id = rally_id;
  }
  const PlayerId last_actor = r.shots.back().actor;
  r.winner = fault ? opponent(last_actor) : last_actor;
  return r;
}

}  // namespace shuttle::testing
