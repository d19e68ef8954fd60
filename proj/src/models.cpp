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

#include "shuttle/models.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "shuttle/error.hpp"

namespace shuttle {

int reduced_action_key(const Action& a, ActionReduction reduction) {
  if (reduction == ActionReduction::Full) return encode_action(a);
  const int shot = static_cast<int>(a.shot);
  const int height = static_cast<int>(a.height);
  return ((shot * kNumHeights + height) * 3 + a.target.row) * kNumExecCodes + a.exec.code();
}

int reduced_key_count(ActionReduction reduction) {
  return reduction == ActionReduction::Full ? kNumActions
                                            : kNumShotTypes * kNumHeights * 3 * kNumExecCodes;
}

std::string_view to_string(ActionReduction r) {
  return r == ActionReduction::Full ? "full" : "drop_col";
}

ActionReduction parse_action_reduction(std::string_view s) {
  if (s == "drop_col") return ActionReduction::DropCol;
  if (s == "full") return ActionReduction::Full;
  throw ParseError("unknown action_reduction '" + std::string(s) + "'");
}

// ---- binary tables -------------------------------------------------------------

BinaryOutcomeTable::BinaryOutcomeTable(double alpha, ActionReduction reduction)
    : alpha_(alpha), reduction_(reduction), keys_(reduced_key_count(reduction)) {
  if (!(alpha > 0.0)) throw RangeError("smoothing alpha must be > 0");
  cells_.resize(static_cast<std::size_t>(kNumContexts) * static_cast<std::size_t>(keys_));
}

const CellCounts& BinaryOutcomeTable::cell(int ctx_index, int action_key) const {
  if (ctx_index < 0 || ctx_index >= kNumContexts || action_key < 0 || action_key >= keys_) {
    throw RangeError("cell index out of range");
  }
  return cells_[static_cast<std::size_t>(ctx_index) * keys_ + action_key];
}

CellCounts& BinaryOutcomeTable::mutable_cell(int ctx_index, int action_key) {
  (void)cell(ctx_index, action_key);
  return cells_[static_cast<std::size_t>(ctx_index) * keys_ + action_key];
}

void BinaryOutcomeTable::record(int ctx_index, int action_key, bool success) {
  CellCounts& c = mutable_cell(ctx_index, action_key);
  ++c.total;
  if (success) ++c.success;
}

double BinaryOutcomeTable::probability(int ctx_index, int action_key) const {
  const CellCounts& c = cell(ctx_index, action_key);
  return (static_cast<double>(c.success) + alpha_) / (static_cast<double>(c.total) + 2.0 * alpha_);
}

double BinaryOutcomeTable::probability(const ContextKey& ctx, const Action& a) const {
  return probability(ctx.index(), reduced_action_key(a, reduction_));
}

Json BinaryOutcomeTable::to_json(std::string_view kind) const {
  Json cells = Json::array();
  for (int c = 0; c < kNumContexts; ++c) {
    for (int k = 0; k < keys_; ++k) {
      const CellCounts& cc = cell(c, k);
      if (cc.total == 0) continue;
      cells.push_back(Json{{"context", ContextKey::from_index(c)},
                           {"action_key", k},
                           {"success_count", cc.success},
                           {"total_count", cc.total}});
    }
  }
  return Json{{"schema_version", kModelSchemaVersion},
              {"kind", kind},
              {"alpha", alpha_},
              {"action_reduction", to_string(reduction_)},
              {"cells", cells}};
}

void BinaryOutcomeTable::load_cells(const Json& j) {
  for (const Json& e : j.at("cells")) {
    const int ctx = e.at("context").get<ContextKey>().index();
    const int key = e.at("action_key").get<int>();
    const auto success = e.at("success_count").get<std::int64_t>();
    const auto total = e.at("total_count").get<std::int64_t>();
    if (success < 0 || total < success) throw ValidationError("cell counts violate 0 <= success <= total");
    CellCounts& c = mutable_cell(ctx, key);
    c.success = success;
    c.total = total;
  }
}

namespace {

void check_header(const Json& j, std::string_view kind) {
  const int version = j.at("schema_version").get<int>();
  if (version != kModelSchemaVersion) {
    throw ValidationError("unsupported model schema_version " + std::to_string(version));
  }
  const auto actual = j.at("kind").get<std::string>();
  if (actual != kind) {
    throw ValidationError("expected model kind '" + std::string(kind) + "', got '" + actual + "'");
  }
}

template <class Model>
Model table_from_json(const Json& j, std::string_view kind) {
  try {
    check_header(j, kind);
    Model m(j.at("alpha").get<double>(),
            parse_action_reduction(j.at("action_reduction").get<std::string>()));
    m.load_cells(j);
    return m;
  } catch (const Json::exception& e) {
    throw ParseError(std::string(kind) + " model: " + e.what());
  }
}

}  // namespace

SuccessModel fit_success(const std::vector<RallyRecord>& train, double alpha,
                         ActionReduction reduction) {
  SuccessModel m(alpha, reduction);
  for (const auto& rally : train) {
    const auto events = rally.events();
    for (std::size_t i = 0; i < events.size(); ++i) {
      const ContextKey ctx = context_of(std::span(events).first(i));
      m.record(ctx.index(), reduced_action_key(events[i].action, reduction),
               events[i].exec_result == ExecResult::Valid);
    }
  }
  return m;
}

ReturnModel fit_return(const std::vector<RallyRecord>& train, double alpha,
                       ActionReduction reduction) {
  ReturnModel m(alpha, reduction);
  for (const auto& rally : train) {
    for (const auto& shot : rally.shots) {
      if (shot.exec_result != ExecResult::Valid) continue;
      m.record(ContextKey::facing(shot.action).index(), reduced_action_key(shot.action, reduction),
               shot.defense_result == DefenseResult::Returned);
    }
  }
  return m;
}

Json success_model_to_json(const SuccessModel& m) { return m.to_json("success"); }
Json return_model_to_json(const ReturnModel& m) { return m.to_json("return"); }
SuccessModel success_model_from_json(const Json& j) { return table_from_json<SuccessModel>(j, "success"); }
ReturnModel return_model_from_json(const Json& j) { return table_from_json<ReturnModel>(j, "return"); }

// ---- next action ---------------------------------------------------------------

NextActionModel::NextActionModel(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0)) throw RangeError("smoothing alpha must be > 0");
  counts_.assign(2u * kNumContexts * kNumActions, 0);
  totals_.assign(2u * kNumContexts, 0);
}

std::size_t NextActionModel::offset(PlayerId player, int ctx_index) const {
  if (ctx_index < 0 || ctx_index >= kNumContexts) throw RangeError("context index out of range");
  return static_cast<std::size_t>(index_of(player)) * kNumContexts + static_cast<std::size_t>(ctx_index);
}

void NextActionModel::record(PlayerId player, const ContextKey& ctx, int action) {
  if (action < 0 || action >= kNumActions) throw RangeError("action index out of range");
  const std::size_t o = offset(player, ctx.index());
  ++counts_[o * kNumActions + action];
  ++totals_[o];
}

std::int64_t NextActionModel::count(PlayerId player, int ctx_index, int action) const {
  return counts_[offset(player, ctx_index) * kNumActions + action];
}

std::int64_t NextActionModel::context_total(PlayerId player, int ctx_index) const {
  return totals_[offset(player, ctx_index)];
}

ActionDistribution NextActionModel::distribution(PlayerId player, const ContextKey& ctx) const {
  const std::size_t o = offset(player, ctx.index());
  const double denom = static_cast<double>(totals_[o]) + kNumActions * alpha_;
  ActionDistribution p{};
  const std::int64_t* c = counts_.data() + o * kNumActions;
  for (int i = 0; i < kNumActions; ++i) p[i] = (static_cast<double>(c[i]) + alpha_) / denom;
  return p;
}

Json NextActionModel::to_json() const {
  Json cells = Json::array();
  for (int p = 0; p < 2; ++p) {
    for (int c = 0; c < kNumContexts; ++c) {
      for (int a = 0; a < kNumActions; ++a) {
        const auto n = count(static_cast<PlayerId>(p), c, a);
        if (n == 0) continue;
        cells.push_back(Json{{"player", static_cast<PlayerId>(p)},
                             {"context", ContextKey::from_index(c)},
                             {"action", a},
                             {"count", n}});
      }
    }
  }
  return Json{{"schema_version", kModelSchemaVersion},
              {"kind", "next_action"},
              {"alpha", alpha_},
              {"cells", cells}};
}

NextActionModel NextActionModel::from_json(const Json& j) {
  try {
    check_header(j, "next_action");
    NextActionModel m(j.at("alpha").get<double>());
    for (const Json& e : j.at("cells")) {
      const auto player = e.at("player").get<PlayerId>();
      const int ctx = e.at("context").get<ContextKey>().index();
      const int action = e.at("action").get<int>();
      const auto n = e.at("count").get<std::int64_t>();
      if (action < 0 || action >= kNumActions || n < 0) throw ValidationError("bad next_action cell");
      const std::size_t o = m.offset(player, ctx);
      m.counts_[o * kNumActions + action] += n;
      m.totals_[o] += n;
    }
    return m;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("next_action model: ") + e.what());
  }
}

NextActionModel fit_next_action(const std::vector<RallyRecord>& train, double alpha) {
  NextActionModel m(alpha);
  for (const auto& rally : train) {
    const auto events = rally.events();
    for (std::size_t i = 0; i < events.size(); ++i) {
      m.record(events[i].actor, context_of(std::span(events).first(i)), encode_action(events[i].action));
    }
  }
  return m;
}

Action sample_next_action(const NextActionModel& m, const ContextKey& ctx, PlayerId player, Rng& rng) {
  const auto dist = m.distribution(player, ctx);
  return decode_action(static_cast<int>(rng.categorical(dist)));
}

// ---- top-k ---------------------------------------------------------------

int label_count(Projection p) {
  switch (p) {
    case Projection::StrokeType: return kNumShotTypes;
    case Projection::LandingZone: return kNumZones;
    case Projection::FullAction: return kNumActions;
  }
  return 0;
}

int project_label(const Action& a, Projection p) {
  switch (p) {
    case Projection::StrokeType: return static_cast<int>(a.shot);
    case Projection::LandingZone: return a.target.index();
    case Projection::FullAction: return encode_action(a);
  }
  return 0;
}

std::string_view to_string(Projection p) {
  switch (p) {
    case Projection::StrokeType: return "stroke_type";
    case Projection::LandingZone: return "landing_zone";
    case Projection::FullAction: return "full_action";
  }
  return "";
}

Projection parse_projection(std::string_view s) {
  if (s == "stroke_type") return Projection::StrokeType;
  if (s == "landing_zone") return Projection::LandingZone;
  if (s == "full_action") return Projection::FullAction;
  throw ParseError("unknown projection '" + std::string(s) + "'");
}

std::vector<int> rank_labels(const ActionDistribution& dist, Projection projection) {
  const int n = label_count(projection);
  std::vector<double> mass(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < kNumActions; ++i) mass[project_label(decode_action(i), projection)] += dist[i];
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mass[a] > mass[b]; });
  return order;
}

double topk_accuracy(const DistributionFn& dist, const std::vector<RallyRecord>& test, int k,
                     Projection projection, std::optional<PlayerId> player) {
  if (k < 1) throw RangeError("k must be >= 1");
  std::int64_t hits = 0;
  std::int64_t total = 0;
  // Rankings depend only on (player, context); computed on first use.
  std::vector<std::vector<int>> cache(2u * kNumContexts);
  for (const auto& rally : test) {
    const auto events = rally.events();
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (player && events[i].actor != *player) continue;
      const ContextKey ctx = context_of(std::span(events).first(i));
      auto& ranked = cache[static_cast<std::size_t>(index_of(events[i].actor)) * kNumContexts + ctx.index()];
      if (ranked.empty()) ranked = rank_labels(dist(events[i].actor, ctx), projection);
      const int label = project_label(events[i].action, projection);
      const auto top = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
      if (std::find(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top), label) !=
          ranked.begin() + static_cast<std::ptrdiff_t>(top)) {
        ++hits;
      }
      ++total;
    }
  }
  if (total == 0) throw ValidationError("top-k accuracy needs a nonempty test set");
  return static_cast<double>(hits) / static_cast<double>(total);
}

double topk_accuracy(const NextActionModel& m, const std::vector<RallyRecord>& test, int k,
                     Projection projection, std::optional<PlayerId> player) {
  return topk_accuracy(
      [&m](PlayerId p, const ContextKey& ctx) { return m.distribution(p, ctx); }, test, k, projection,
      player);
}

// ---- files ---------------------------------------------------------------

void save_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace shuttle
