// Copyright 2026 The dlgctx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dlgctx/corpus.hpp"
#include "dlgctx/phase.hpp"
#include "dlgctx/predictor.hpp"

namespace dlgctx {

enum class OperatorLevel : std::uint8_t { turn, phase, dialogue };
enum class OperatorKind : std::uint8_t { hand_coded, learned, repair };

std::string to_string(OperatorLevel level);
std::string to_string(OperatorKind kind);

/// Rewrite rule from a goal to a sequence of acts (turn level) or of
/// lower-level operator names.
struct PlanOperator {
  std::string name;
  OperatorLevel level = OperatorLevel::turn;
  std::vector<std::string> body;
  std::optional<DialoguePhase> phase;
  OperatorKind kind = OperatorKind::hand_coded;
  std::size_t support = 0;

  bool operator==(const PlanOperator&) const = default;
};

using OperatorSet = std::vector<PlanOperator>;

/// Checks non-empty bodies and level stratification. When `inventory` is
/// given, turn-level bodies must use its acts.
void validate_operators(const OperatorSet& ops, const ActInventory* inventory = nullptr);
OperatorSet operators_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OperatorSet& ops);
OperatorSet load_operators(const std::filesystem::path& path);
void save_operators(const OperatorSet& ops, const std::filesystem::path& path);

/// Phase an act votes for when no tagged operator covers it.
DialoguePhase fallback_phase(const ActLabel& act);

enum class PlanNodeKind : std::uint8_t { dialogue, phase, turn, op, repair, act };

struct PlanNode {
  PlanNodeKind kind = PlanNodeKind::act;
  std::string label;
  std::optional<DialoguePhase> phase;
  std::vector<PlanNode> children;
  /// Gap estimate on repair nodes.
  std::optional<std::string> note;

  std::vector<ActLabel> leaves() const;
  std::size_t leaf_count() const;
  bool operator==(const PlanNode&) const = default;
};

/// Greedy longest-match cover of one turn's acts by turn-level operators;
/// uncovered runs become repair nodes. Ties prefer higher support, then
/// hand-coded operators, then name order. Never fails for non-empty input.
PlanNode recognize_turn(std::span<const ActLabel> acts, const OperatorSet& ops);

/// Dominant phase of a turn subtree: tagged operators vote with their leaf
/// count, everything else votes per act through fallback_phase(). Ties go
/// to `current`, then to the nearest later phase.
DialoguePhase determine_phase(const PlanNode& turn, DialoguePhase current);

/// Phase of each leaf in order: the covering operator's tag, or the act's
/// fallback vote.
std::vector<DialoguePhase> leaf_phases(const PlanNode& turn);

struct AttachResult {
  DialoguePhase phase;
  bool phase_repair = false;
};

/// Whole-dialogue tree: dialogue root -> phase nodes -> turn subtrees.
class IntentionalStructure {
 public:
  AttachResult attach_turn(PlanNode turn);

  bool empty() const { return root_.children.empty(); }
  DialoguePhase current_phase() const { return current_; }
  const PlanNode& root() const { return root_; }
  std::size_t phase_repair_count() const;
  std::vector<ActLabel> leaves() const { return root_.leaves(); }
  /// Indented tree; leaves are prefixed "act:" and repairs "repair:".
  std::string dump() const;

 private:
  PlanNode root_{PlanNodeKind::dialogue, "dialogue", std::nullopt, {}, std::nullopt};
  DialoguePhase current_ = DialoguePhase::opening;
};

/// Turn-level operators mined from complete turns seen in at least
/// `min_support` turns. Turns whose full pattern is rarer contribute their
/// prefix and suffix at each fallback-phase boundary instead.
OperatorSet learn_operators(const Corpus& corpus, std::size_t min_support);

inline constexpr int kMaxEstimatedGap = 3;

/// Annotates the repair node at `child_index` of `turn` with the best gap
/// filler. `preceding` is the dialogue history before the turn, its last
/// element tagged with the direction into the turn. Gaps wider than
/// kMaxEstimatedGap are noted as "unestimated".
void repair_and_estimate(PlanNode& turn, std::size_t child_index, const NGramModel& model,
                         const History& preceding = {});

}  // namespace dlgctx
