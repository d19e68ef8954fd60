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

#include "shuttle/context.hpp"

#include <string>

#include "shuttle/error.hpp"

namespace shuttle {

int ContextKey::index() const {
  if (serving) return 0;
  if (!prev_shot || !prev_height || !prev_zone_row) {
    throw ConstraintError("non-serve context key requires every prev_* field");
  }
  const int row = *prev_zone_row;
  if (row < 0 || row > 2) throw ConstraintError("prev_zone_row out of range");
  return 1 + (static_cast<int>(*prev_shot) * kNumHeights + static_cast<int>(*prev_height)) * 3 + row;
}

ContextKey ContextKey::from_index(int idx) {
  if (idx < 0 || idx >= kNumContexts) {
    throw RangeError("context index out of range: " + std::to_string(idx));
  }
  if (idx == 0) return serve();
  const int rest = idx - 1;
  return {static_cast<ShotType>(rest / 9), static_cast<HeightBand>((rest / 3) % 3), rest % 3, false};
}

ContextKey context_of(std::span<const RallyEvent> events) {
  if (events.empty()) return ContextKey::serve();
  return ContextKey::facing(events.back().action);
}

void to_json(Json& j, const ContextKey& c) {
  if (c.serving) {
    j = Json{{"serving", true}};
    return;
  }
  j = Json{{"serving", false},
           {"prev_shot", *c.prev_shot},
           {"prev_height", *c.prev_height},
           {"prev_zone_row", *c.prev_zone_row}};
}

void from_json(const Json& j, ContextKey& c) {
  c = ContextKey::serve();
  if (j.at("serving").get<bool>()) {
    if (j.contains("prev_shot") || j.contains("prev_height") || j.contains("prev_zone_row")) {
      throw ParseError("serve context must not carry prev_* fields");
    }
    return;
  }
  c.serving = false;
  c.prev_shot = j.at("prev_shot").get<ShotType>();
  c.prev_height = j.at("prev_height").get<HeightBand>();
  c.prev_zone_row = j.at("prev_zone_row").get<int>();
  (void)c.index();
}

}  // namespace shuttle
