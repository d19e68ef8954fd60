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

#include "shuttle/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "shuttle/error.hpp"

namespace shuttle {

std::vector<RallyEvent> RallyRecord::events() const {
  std::vector<RallyEvent> out;
  out.reserve(shots.size());
  for (const auto& s : shots) out.push_back(s.event());
  return out;
}

void to_json(Json& j, const ShotRecord& s) {
  j = Json{{"match_id", s.match_id},   {"rally_id", s.rally_id},
           {"shot_index", s.shot_index}, {"actor", s.actor},
           {"action", s.action},       {"exec_result", s.exec_result}};
  if (s.defense_result) j["defense_result"] = *s.defense_result;
  if (s.position) j["position"] = *s.position;
}

void from_json(const Json& j, ShotRecord& s) {
  s.match_id = j.at("match_id").get<std::string>();
  s.rally_id = j.at("rally_id").get<int>();
  s.shot_index = j.at("shot_index").get<int>();
  s.actor = j.at("actor").get<PlayerId>();
  s.action = j.at("action").get<Action>();
  s.exec_result = j.at("exec_result").get<ExecResult>();
  s.defense_result.reset();
  s.position.reset();
  if (auto it = j.find("defense_result"); it != j.end() && !it->is_null()) {
    s.defense_result = it->get<DefenseResult>();
  }
  if (auto it = j.find("position"); it != j.end() && !it->is_null()) {
    s.position = it->get<CourtZone>();
  }
}

void to_json(Json& j, const RallyRecord& r) {
  j = Json{{"match_id", r.match_id}, {"rally_id", r.rally_id}, {"server", r.server},
           {"shots", r.shots},       {"winner", r.winner}};
}

void from_json(const Json& j, RallyRecord& r) {
  r.match_id = j.at("match_id").get<std::string>();
  r.rally_id = j.at("rally_id").get<int>();
  r.server = j.at("server").get<PlayerId>();
  r.shots = j.at("shots").get<std::vector<ShotRecord>>();
  r.winner = j.at("winner").get<PlayerId>();
}

std::vector<std::string> validate_rally(const RallyRecord& r) {
  std::vector<std::string> violations;
  const std::string where = "rally " + r.match_id + "/" + std::to_string(r.rally_id) + ": ";
  auto fail = [&](const std::string& msg) { violations.push_back(where + msg); };

  if (r.shots.empty()) {
    fail("rally has no shots");
    return violations;
  }
  for (std::size_t i = 0; i < r.shots.size(); ++i) {
    const ShotRecord& s = r.shots[i];
    const std::string at = " at shot_index " + std::to_string(i);
    if (s.match_id != r.match_id || s.rally_id != r.rally_id) fail("shot ids disagree with rally" + at);
    if (s.shot_index != static_cast<int>(i)) {
      fail("non-consecutive shot_index " + std::to_string(s.shot_index) + at);
    }
    const PlayerId expected = (i % 2 == 0) ? r.server : opponent(r.server);
    if (s.actor != expected) fail("actors do not alternate from the server" + at);
    if (s.action.exec.backhand && s.action.exec.around_head) fail("backhand and around_head both set" + at);
    const bool valid = s.exec_result == ExecResult::Valid;
    if (valid != s.defense_result.has_value()) {
      fail("defense_result must be present iff exec_result is valid" + at);
    }
    const bool last = i + 1 == r.shots.size();
    if (!last) {
      if (!valid) fail("non-terminal fault at shot_index " + std::to_string(i));
      else if (s.defense_result == DefenseResult::Missed) {
        fail("non-terminal miss at shot_index " + std::to_string(i));
      }
    }
  }
  const ShotRecord& last = r.shots.back();
  const bool terminal = last.exec_result == ExecResult::Fault ||
                        last.defense_result == DefenseResult::Missed;
  if (!terminal) {
    fail("last shot is not terminal");
  } else {
    const PlayerId expected =
        last.exec_result == ExecResult::Fault ? opponent(last.actor) : last.actor;
    if (r.winner != expected) {
      fail("winner " + std::string(to_string(r.winner)) + " does not match terminal event (expected " +
           std::string(to_string(expected)) + ")");
    }
  }
  return violations;
}

std::vector<RallyRecord> parse_rally_log(const std::string& text) {
  std::vector<RallyRecord> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    RallyRecord rec;
    try {
      rec = Json::parse(line).get<RallyRecord>();
    } catch (const Json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (auto v = validate_rally(rec); !v.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + v.front());
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RallyRecord> load_rally_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open rally log " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_rally_log(ss.str());
}

std::string format_rally_log(const std::vector<RallyRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += Json(r).dump();
    out += '\n';
  }
  return out;
}

void save_rally_log(const std::filesystem::path& path, const std::vector<RallyRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NotFoundError("cannot write rally log " + path.string());
  out << format_rally_log(records);
}

std::pair<std::vector<RallyRecord>, std::vector<RallyRecord>> split_rallies(
    const std::vector<RallyRecord>& records, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw RangeError("test_fraction must lie in (0, 1)");
  }
  const std::size_t n = records.size();
  if (n < 2) throw ValidationError("split requires at least 2 rallies");

  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  // Fisher-Yates on indices with our own rng for cross-platform stability.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  std::vector<char> is_test(n, 0);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = 1;

  std::pair<std::vector<RallyRecord>, std::vector<RallyRecord>> out;
  for (std::size_t i = 0; i < n; ++i) (is_test[i] ? out.second : out.first).push_back(records[i]);
  return out;
}

DatasetSummary summary_stats(const std::vector<RallyRecord>& records) {
  DatasetSummary s;
  s.rallies = static_cast<std::int64_t>(records.size());
  for (const auto& r : records) {
    s.rally_length_hist[static_cast<int>(r.shots.size())] += 1;
    s.players[index_of(r.winner)].rallies_won += 1;
    for (const auto& shot : r.shots) {
      ++s.shots;
      ++s.shot_type_counts[static_cast<int>(shot.action.shot)];
      auto& p = s.players[index_of(shot.actor)];
      ++p.shots;
      if (shot.exec_result == ExecResult::Fault) ++p.faults;
    }
  }
  if (s.shots > 0) {
    for (int i = 0; i < kNumShotTypes; ++i) {
      s.shot_type_freq[i] = static_cast<double>(s.shot_type_counts[i]) / static_cast<double>(s.shots);
    }
  }
  if (s.rallies > 0) s.mean_rally_length = static_cast<double>(s.shots) / static_cast<double>(s.rallies);
  for (auto& p : s.players) {
    if (p.shots > 0) p.fault_rate = static_cast<double>(p.faults) / static_cast<double>(p.shots);
    if (s.rallies > 0) p.win_rate = static_cast<double>(p.rallies_won) / static_cast<double>(s.rallies);
  }
  return s;
}

void to_json(Json& j, const DatasetSummary& s) {
  Json freq = Json::object();
  Json counts = Json::object();
  for (int i = 0; i < kNumShotTypes; ++i) {
    const std::string name(to_string(static_cast<ShotType>(i)));
    freq[name] = s.shot_type_freq[i];
    counts[name] = s.shot_type_counts[i];
  }
  Json hist = Json::object();
  for (const auto& [len, count] : s.rally_length_hist) hist[std::to_string(len)] = count;
  Json players = Json::array();
  for (const auto& p : s.players) {
    players.push_back(Json{{"shots", p.shots},
                           {"faults", p.faults},
                           {"rallies_won", p.rallies_won},
                           {"fault_rate", p.fault_rate},
                           {"win_rate", p.win_rate}});
  }
  j = Json{{"rallies", s.rallies},
           {"shots", s.shots},
           {"mean_rally_length", s.mean_rally_length},
           {"shot_type_counts", counts},
           {"shot_type_freq", freq},
           {"rally_length_hist", hist},
           {"players", players}};
}

}  // namespace shuttle
