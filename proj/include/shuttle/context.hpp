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

#include <optional>
#include <span>

#include "shuttle/domain.hpp"

namespace shuttle {

// Discretized summary of the incoming shot a player must answer. The serve
// key has every prev_* field empty.
struct ContextKey {
  std::optional<ShotType> prev_shot;
  std::optional<HeightBand> prev_height;
  std::optional<int> prev_zone_row;
  bool serving = true;

  static ContextKey serve() { return {}; }
  static ContextKey facing(const Action& incoming) {
    return {incoming.shot, incoming.height, incoming.target.row, false};
  }

  // 0 for the serve key, 1 + (shot*3 + height)*3 + row otherwise.
  int index() const;
  static ContextKey from_index(int idx);
  friend bool operator==(const ContextKey&, const ContextKey&) = default;
};

inline constexpr int kNumContexts = 1 + kNumShotTypes * kNumHeights * 3;  // 55

// Context of the player about to hit, given the rally prefix so far. Events
// alternate actors, so the last event is always the incoming shot.
ContextKey context_of(std::span<const RallyEvent> events);

void to_json(Json& j, const ContextKey& c);
void from_json(const Json& j, ContextKey& c);

}  // namespace shuttle
