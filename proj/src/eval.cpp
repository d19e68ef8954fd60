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

#include "shuttle/eval.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "shuttle/error.hpp"

namespace shuttle {

double ci_halfwidth(double p, int n) {
  if (n <= 0) throw RangeError("confidence interval needs n >= 1");
  return 1.96 * std::sqrt(p * (1.0 - p) / n);
}

void to_json(Json& j, const WinRateReport& r) {
  j = Json{{"n_games", r.n_games},       {"wins", r.wins},
           {"win_rate", r.win_rate},     {"ci_halfwidth", r.ci_halfwidth},
           {"game_seeds", r.game_seeds}, {"fingerprint", r.fingerprint},
           {"score_rule", r.score_rule}, {"best_of", r.best_of}};
}

PlayerId play_match(const Policy& a, const Policy& b, const EnvConfig& cfg, std::uint64_t seed,
                    int best_of) {
  if (best_of < 1 || best_of % 2 == 0) throw RangeError("best_of must be a positive odd number");
  const int needed = best_of / 2 + 1;
  std::array<int, 2> games{0, 0};
  EnvConfig game_cfg = cfg;
  for (int g = 0;; ++g) {
    const GameRecord rec = play_game(a, b, game_cfg, best_of == 1 ? seed : mix_seed(seed, g));
    if (++games[index_of(rec.winner)] == needed) return rec.winner;
    game_cfg.initial_server = rec.winner;
  }
}

WinRateReport run_matches(const Policy& a, const Policy& b, const EnvConfig& cfg, int n,
                          std::uint64_t seed, int best_of) {
  if (n < 1) throw RangeError("run_matches needs n >= 1");
  cfg.validate(false);
  WinRateReport r;
  r.n_games = n;
  r.best_of = best_of;
  r.score_rule = cfg.score_rule.name();
  r.game_seeds.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(i));
    r.game_seeds.push_back(s);
    if (play_match(a, b, cfg, s, best_of) == PlayerId::P0) ++r.wins;
  }
  r.win_rate = static_cast<double>(r.wins) / n;
  r.ci_halfwidth = ci_halfwidth(r.win_rate, n);
  r.fingerprint = fingerprint(Json{{"policy_a", fingerprint(a.to_json())},
                                   {"policy_b", fingerprint(b.to_json())},
                                   {"env", cfg.description},
                                   {"score_rule", r.score_rule},
                                   {"initial_server", cfg.initial_server},
                                   {"observation_window", cfg.observation.history_window},
                                   {"seed", seed},
                                   {"n", n},
                                   {"best_of", best_of}});
  return r;
}

double analytic_rally_win_prob(double p_s_a, double p_r_a, double p_s_b, double p_r_b) {
  for (double p : {p_s_a, p_r_a, p_s_b, p_r_b}) {
    if (!(p >= 0.0 && p <= 1.0)) throw RangeError("probabilities must lie in [0, 1]");
  }
  const double det = 1.0 - p_s_a * p_r_b * p_s_b * p_r_a;
  if (det <= 0.0) throw ConstraintError("rally never terminates: all four probabilities are 1");
  return (p_s_a * (1.0 - p_r_b) + p_s_a * p_r_b * (1.0 - p_s_b)) / det;
}

void to_json(Json& j, const ShotHistogram& h) {
  Json rows = Json::object();
  for (int s = 0; s < kNumShotTypes; ++s) {
    rows[std::string(to_string(static_cast<ShotType>(s)))] = h.freq[static_cast<std::size_t>(s)];
  }
  j = Json{{"shots", h.shots}, {"freq", rows}};
}

ShotHistogram shot_distribution(const PolicyHandle& policy, EnvConfig cfg, int n_rallies,
                                std::uint64_t seed) {
  if (!policy) throw ValidationError("shot_distribution needs a policy");
  if (n_rallies < 1) throw RangeError("n_rallies must be >= 1");
  cfg.seed = seed;
  Env env(cfg);
  env.reset(seed);
  ShotHistogram h;
  std::array<std::array<std::int64_t, kNumZones>, kNumShotTypes> counts{};
  int rallies = 0;
  std::uint64_t game = 0;
  while (rallies < n_rallies) {
    if (env.game_done()) {
      env.reset(mix_seed(seed, ++game));
      continue;
    }
    const PlayerId me = cfg.agent_seat;
    const Observation obs = env.observation_for(me);
    const int idx = policy->act_index(PolicyInput{obs, env.context(), me}, env.rng());
    const Action a = decode_action(idx);
    ++counts[static_cast<std::size_t>(a.shot)][static_cast<std::size_t>(a.target.index())];
    ++h.shots;
    const StepResult res = env.step(a);
    if (res.rally_done) ++rallies;
  }
  for (int s = 0; s < kNumShotTypes; ++s) {
    for (int z = 0; z < kNumZones; ++z) {
      h.freq[static_cast<std::size_t>(s)][static_cast<std::size_t>(z)] =
          static_cast<double>(counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(z)]) /
          static_cast<double>(h.shots);
    }
  }
  return h;
}

TopkTable topk_report(const DistributionFn& dist, const std::vector<RallyRecord>& test,
                      const std::vector<int>& ks, const std::vector<Projection>& projections) {
  if (ks.empty() || projections.empty()) throw ValidationError("top-k report needs ks and projections");
  TopkTable t;
  t.ks = ks;
  t.projections = projections;
  for (int p = 0; p < 2; ++p) {
    const auto player = static_cast<PlayerId>(p);
    bool has_shots = false;
    for (const auto& r : test) {
      for (const auto& s : r.shots) has_shots = has_shots || s.actor == player;
    }
    auto& rows = t.values[static_cast<std::size_t>(p)];
    for (Projection proj : projections) {
      std::vector<double> row;
      for (int k : ks) {
        row.push_back(has_shots ? topk_accuracy(dist, test, k, proj, player)
                                : std::numeric_limits<double>::quiet_NaN());
      }
      rows.push_back(std::move(row));
    }
  }
  return t;
}

TopkTable topk_report(const NextActionModel& m, const std::vector<RallyRecord>& test,
                      const std::vector<int>& ks, const std::vector<Projection>& projections) {
  return topk_report([&m](PlayerId p, const ContextKey& c) { return m.distribution(p, c); }, test,
                     ks, projections);
}

std::string TopkTable::to_text() const {
  std::ostringstream out;
  char buf[32];
  out << "player  projection    ";
  for (int k : ks) {
    std::snprintf(buf, sizeof buf, "  top-%-3d", k);
    out << buf;
  }
  out << '\n';
  for (int p = 0; p < 2; ++p) {
    for (std::size_t j = 0; j < projections.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%-8s%-14s", std::string(to_string(static_cast<PlayerId>(p))).c_str(),
                    std::string(to_string(projections[j])).c_str());
      out << buf;
      for (double v : values[static_cast<std::size_t>(p)][j]) {
        if (std::isnan(v)) {
          out << "       - ";
        } else {
          std::snprintf(buf, sizeof buf, "  %6.4f ", v);
          out << buf;
        }
      }
      out << '\n';
    }
  }
  return out.str();
}

void to_json(Json& j, const TopkTable& t) {
  j = Json{{"ks", t.ks}, {"players", Json::object()}};
  for (int p = 0; p < 2; ++p) {
    Json per = Json::object();
    for (std::size_t i = 0; i < t.projections.size(); ++i) {
      Json row = Json::object();
      for (std::size_t k = 0; k < t.ks.size(); ++k) {
        const double v = t.values[static_cast<std::size_t>(p)][i][k];
        row[std::to_string(t.ks[k])] = std::isnan(v) ? Json(nullptr) : Json(v);
      }
      per[std::string(to_string(t.projections[i]))] = row;
    }
    j["players"][std::string(to_string(static_cast<PlayerId>(p)))] = per;
  }
}

}  // namespace shuttle
