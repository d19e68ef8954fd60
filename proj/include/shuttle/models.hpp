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

// Smoothed conditional probability tables fitted from rally logs: shot
// success, defensive return, and the per-player next-action distribution.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "shuttle/context.hpp"
#include "shuttle/dataset.hpp"
#include "shuttle/outcome_model.hpp"
#include "shuttle/rng.hpp"

namespace shuttle {

inline constexpr int kModelSchemaVersion = 1;

// How actions are collapsed before indexing the success/return tables.
// DropCol keeps (shot, height, target row, exec): 162 keys.
enum class ActionReduction : std::uint8_t { DropCol, Full };

int reduced_action_key(const Action& a, ActionReduction reduction = ActionReduction::DropCol);
int reduced_key_count(ActionReduction reduction);
std::string_view to_string(ActionReduction r);
ActionReduction parse_action_reduction(std::string_view s);

struct CellCounts {
  std::int64_t success = 0;
  std::int64_t total = 0;
  friend bool operator==(const CellCounts&, const CellCounts&) = default;
};

// Laplace-smoothed Bernoulli table keyed by (context, reduced action).
// probability() = (success + alpha) / (total + 2 alpha).
class BinaryOutcomeTable : public OutcomeModel {
 public:
  BinaryOutcomeTable(double alpha, ActionReduction reduction);

  double probability(const ContextKey& ctx, const Action& a) const override;
  double probability(int ctx_index, int action_key) const;

  const CellCounts& cell(int ctx_index, int action_key) const;
  void record(int ctx_index, int action_key, bool success);

  double alpha() const { return alpha_; }
  ActionReduction reduction() const { return reduction_; }
  int keys_per_context() const { return keys_; }

  Json to_json(std::string_view kind) const;
  void load_cells(const Json& j);

  friend bool operator==(const BinaryOutcomeTable& a, const BinaryOutcomeTable& b) {
    return a.alpha_ == b.alpha_ && a.reduction_ == b.reduction_ && a.cells_ == b.cells_;
  }

 private:
  CellCounts& mutable_cell(int ctx_index, int action_key);
  double alpha_;
  ActionReduction reduction_;
  int keys_;
  std::vector<CellCounts> cells_;
};

// Cells are (hitter's context, hitter's action); success = valid execution.
class SuccessModel final : public BinaryOutcomeTable {
 public:
  using BinaryOutcomeTable::BinaryOutcomeTable;
};

// Cells are (defender's context = facing the shot, shot); only valid shots
// are counted; success = returned.
class ReturnModel final : public BinaryOutcomeTable {
 public:
  using BinaryOutcomeTable::BinaryOutcomeTable;
};

SuccessModel fit_success(const std::vector<RallyRecord>& train, double alpha = 1.0,
                         ActionReduction reduction = ActionReduction::DropCol);
ReturnModel fit_return(const std::vector<RallyRecord>& train, double alpha = 1.0,
                       ActionReduction reduction = ActionReduction::DropCol);

inline double p_succ(const SuccessModel& m, const ContextKey& ctx, const Action& a) {
  return m.probability(ctx, a);
}
inline double p_ret(const ReturnModel& m, const ContextKey& ctx, const Action& a) {
  return m.probability(ctx, a);
}

using ActionDistribution = std::array<double, kNumActions>;

class NextActionModel {
 public:
  explicit NextActionModel(double alpha = 1.0);

  void record(PlayerId player, const ContextKey& ctx, int action);
  std::int64_t count(PlayerId player, int ctx_index, int action) const;
  std::int64_t context_total(PlayerId player, int ctx_index) const;

  // (count + alpha) / (total + 486 alpha); uniform for unseen contexts.
  ActionDistribution distribution(PlayerId player, const ContextKey& ctx) const;
  double alpha() const { return alpha_; }

  Json to_json() const;
  static NextActionModel from_json(const Json& j);

  friend bool operator==(const NextActionModel& a, const NextActionModel& b) {
    return a.alpha_ == b.alpha_ && a.counts_ == b.counts_;
  }

 private:
  std::size_t offset(PlayerId player, int ctx_index) const;
  double alpha_;
  std::vector<std::int64_t> counts_;  // [player][context][action]
  std::vector<std::int64_t> totals_;  // [player][context]
};

NextActionModel fit_next_action(const std::vector<RallyRecord>& train, double alpha = 1.0);

Action sample_next_action(const NextActionModel& m, const ContextKey& ctx, PlayerId player, Rng& rng);

enum class Projection : std::uint8_t { StrokeType, LandingZone, FullAction };
int label_count(Projection p);
int project_label(const Action& a, Projection p);
std::string_view to_string(Projection p);
Projection parse_projection(std::string_view s);

using DistributionFn = std::function<ActionDistribution(PlayerId, const ContextKey&)>;

// Fraction of test shots (optionally restricted to one player) whose true
// projected label ranks in the top k of the marginalized distribution.
// Ties break toward the lower label index. Throws on an empty test set.
double topk_accuracy(const DistributionFn& dist, const std::vector<RallyRecord>& test, int k,
                     Projection projection, std::optional<PlayerId> player = std::nullopt);
double topk_accuracy(const NextActionModel& m, const std::vector<RallyRecord>& test, int k,
                     Projection projection, std::optional<PlayerId> player = std::nullopt);

// Labels sorted by descending probability, ascending index on ties.
std::vector<int> rank_labels(const ActionDistribution& dist, Projection projection);

// ---- checkpoints -------------------------------------------------------------

void save_json(const std::filesystem::path& path, const Json& j);
Json load_json(const std::filesystem::path& path);

Json success_model_to_json(const SuccessModel& m);
Json return_model_to_json(const ReturnModel& m);
SuccessModel success_model_from_json(const Json& j);
ReturnModel return_model_from_json(const Json& j);

}  // namespace shuttle
