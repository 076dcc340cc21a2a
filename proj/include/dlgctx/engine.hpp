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
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dlgctx/clarification.hpp"
#include "dlgctx/plan.hpp"
#include "dlgctx/predictor.hpp"
#include "dlgctx/sequence_memory.hpp"
#include "dlgctx/thematic.hpp"

namespace dlgctx {

struct SessionConfig {
  TrackName inference_track = kDeepTrack;
  std::size_t prediction_k = 3;
  bool clarification = true;
  double confusable_threshold = 0.7;
};

/// A component failure recorded instead of aborting the remaining stages.
struct StageError {
  std::string stage;
  std::string message;
  bool operator==(const StageError&) const = default;
};

struct ClarificationEvent {
  /// raised, queued, resolved or repeat_requested.
  std::string event;
  nlohmann::json detail;
  bool operator==(const ClarificationEvent&) const = default;
};

using PredictionSet = std::map<DirectionTag, std::vector<Prediction>>;

struct UtteranceReport {
  std::size_t turn_index = 0;
  std::size_t utterance_index = 0;
  ParticipantId speaker;
  TrackName track;
  ActLabel act;
  /// Filled once the turn is closed.
  std::optional<DialoguePhase> phase;
  /// Time expressions after resolution and completion from context.
  std::vector<TimeDescription> times;
  /// "<stance> <path>" for every attitude the utterance added.
  std::vector<std::string> thematic;
  TimeDescription agreement;
  PredictionSet predictions;
  std::vector<ClarificationEvent> clarification;
  std::vector<std::string> warnings;
  std::vector<StageError> errors;
};

struct TurnReport {
  std::size_t turn_index = 0;
  ParticipantId speaker;
  DialoguePhase phase = DialoguePhase::opening;
  bool phase_repair = false;
  std::optional<PlanNode> subtree;
  std::vector<StageError> errors;
  /// Reports of the turn's utterances with phases filled in.
  std::vector<UtteranceReport> utterances;
};

struct PredictionsQuery {
  std::optional<DirectionTag> direction;
  /// 0 uses the session's prediction_k.
  std::size_t k = 0;
};
struct AgreementQuery {};
struct PhaseQuery {};
struct SuccessorQuery {
  TimeDescription referent;
};
struct ReadingQuery {
  std::vector<ReadingCandidate> candidates;
  std::size_t window = 1;
};
using Query = std::variant<PredictionsQuery, AgreementQuery, PhaseQuery, SuccessorQuery, ReadingQuery>;
using Answer = std::variant<PredictionSet, TimeDescription, DialoguePhase, Successor, ReadingChoice>;

/// Context state of one dialogue. Single writer; queries never mutate.
class Session {
 public:
  Session(SpeakingTime speaking_time, std::shared_ptr<const NGramModel> model, OperatorSet operators = {},
          Lexicon lexicon = {}, SessionConfig config = {});

  std::size_t begin_turn(const ParticipantId& speaker, const std::string& language);

  /// Records the utterance and, on the inference track, updates the thematic
  /// memory and prediction annotations. Throws PreconditionError without an
  /// open turn or for an unregistered track; later failures are reported as
  /// stage errors.
  UtteranceReport process_utterance(const TrackName& track, const ActLabel& act,
                                    const std::vector<TimeExpression>& times,
                                    const std::optional<std::string>& text = std::nullopt);

  bool clarification_pending() const { return fsa_.awaiting(); }
  std::optional<std::string> pending_prompt() const;
  /// Answers the active clarification. An accepted date correction enters
  /// the thematic memory; a rejection leaves it untouched. The returned
  /// report carries only thematic deltas and clarification events.
  UtteranceReport respond(Response response);

  /// Closes the open turn, builds its intentional structure and writes the
  /// phase back onto its utterance records.
  TurnReport process_turn_end(const std::optional<TrackName>& selected_track, std::size_t translated_count);

  Answer query(const Query& q) const;

  const SequenceMemory& memory() const { return memory_; }
  const ThematicMemory& thematic() const { return thematic_; }
  const IntentionalStructure& structure() const { return structure_; }
  const ClarificationFSA& clarification() const { return fsa_; }
  const SessionConfig& config() const { return config_; }
  const SpeakingTime& speaking_time() const { return speaking_time_; }

 private:
  struct HeldInsert {
    ActLabel act;
    ParticipantId speaker;
    std::size_t turn_index;
  };
  // One entry per raised trigger, in activation order; confusables hold nothing.
  using Held = std::optional<HeldInsert>;

  void apply_stance(const TimeDescription& desc, const ActLabel& act, const ParticipantId& speaker,
                    std::size_t turn_index, UtteranceReport& report);
  void apply_bare_act(const ActLabel& act, const ParticipantId& speaker, std::size_t turn_index,
                      UtteranceReport& report);
  void settle(UtteranceReport& report);
  History recent_history(std::size_t n) const;
  PredictionSet predictions(std::size_t k) const;

  SpeakingTime speaking_time_;
  std::shared_ptr<const NGramModel> model_;
  OperatorSet operators_;
  Lexicon lexicon_;
  SessionConfig config_;
  SequenceMemory memory_;
  ThematicMemory thematic_;
  IntentionalStructure structure_;
  ClarificationFSA fsa_;
  std::deque<Held> held_;
  std::vector<UtteranceReport> open_reports_;
};

nlohmann::json to_json(const UtteranceReport& report);
nlohmann::json to_json(const TurnReport& report);
nlohmann::json to_json(const PredictionSet& predictions);

}  // namespace dlgctx
