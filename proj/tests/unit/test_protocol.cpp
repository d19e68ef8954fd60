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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "shuttle/error.hpp"
#include "shuttle/protocol.hpp"

using namespace shuttle;
namespace fs = std::filesystem;

namespace {

fs::path golden_dir() { return fs::path(SHUTTLE_SOURCE_DIR) / "tests" / "golden" / "proto"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Protocol, EveryTypeHasAGoldenThatRoundTripsByteForByte) {
  for (const auto& type : proto::message_types()) {
    const fs::path path = golden_dir() / (type + ".json");
    ASSERT_TRUE(fs::exists(path)) << type;
    const std::string text = slurp(path);
    const Json j = Json::parse(text);
    const proto::Message m = proto::parse_message(j);
    EXPECT_EQ(proto::type_name(m), type);
    const Json back = proto::to_message(m);
    EXPECT_EQ(back, j) << type;
    EXPECT_EQ(back.dump(2) + "\n", text) << type;
    EXPECT_EQ(proto::parse_message(back), m) << type;
  }
}

TEST(Protocol, RejectsOffSchemaMessages) {
  const Json good = Json::parse(slurp(golden_dir() / "shot.json"));
  Json j = good;
  j["extra"] = 1;
  EXPECT_THROW(proto::parse_message(j), ValidationError);
  j = good;
  j.erase("score");
  EXPECT_THROW(proto::parse_message(j), ValidationError);
  j = good;
  j["protocol"] = "shuttle-proto/2";
  EXPECT_THROW(proto::parse_message(j), ValidationError);
  j = good;
  j.erase("protocol");
  EXPECT_THROW(proto::parse_message(j), ValidationError);
  j = good;
  j["type"] = "teleport";
  EXPECT_THROW(proto::parse_message(j), ValidationError);
  j = good;
  j["action"]["target"]["row"] = 3;
  EXPECT_THROW(proto::parse_message(j), ValidationError);
  j = good;
  j["action"]["exec"] = "backhand_around_head";
  EXPECT_THROW(proto::parse_message(j), ValidationError);
  j = good;
  j["score"]["p0"] = "one";
  EXPECT_THROW(proto::parse_message(j), ValidationError);
}

TEST(Protocol, RequestsMayOmitProtocolTag) {
  const auto r = proto::parse_as<proto::AdvanceRequest>(Json{{"type", "advance"}});
  EXPECT_EQ(r.steps, 1);
  const auto rep = proto::parse_as<proto::ReplayRequest>(Json{{"type", "replay"}, {"from_rally", 2}});
  EXPECT_EQ(rep.count, 1);
  EXPECT_THROW(proto::parse_as<proto::ReplayRequest>(Json{{"type", "advance"}}), ValidationError);
}
