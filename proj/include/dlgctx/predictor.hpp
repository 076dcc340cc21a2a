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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dlgctx/corpus.hpp"

namespace dlgctx {

enum class DirectionTag : std::uint8_t { same_speaker, speaker_change, dialogue_start };

std::string to_string(DirectionTag tag);
DirectionTag parse_direction(const std::string& name);
DirectionTag direction_between(const ParticipantId& from, const ParticipantId& to);

/// One element of a prediction history. `direction` describes the
/// transition *out of* this act, so the last element of a history carries
/// the hypothesized speaker of the act being predicted. dialogue_start never
/// appears inside a history; it labels the first utterance of a dialogue.
struct HistoryItem {
  ActLabel act;
  DirectionTag direction = DirectionTag::speaker_change;
  bool operator==(const HistoryItem&) const = default;
};

using History = std::vector<HistoryItem>;

struct Prediction {
  ActLabel act;
  double probability = 0.0;
  bool operator==(const Prediction&) const = default;
};

/// Probability scaled to an integer per-mille value for display.
int per_mille(double probability);

/// Acts of one dialogue in order with their speakers.
struct ActEvent {
  ActLabel act;
  ParticipantId speaker;
};
std::vector<ActEvent> flatten(const Dialogue& dialogue);

/// History for predicting position `pos` of `events`, with the true
/// direction into that position on the last element. Only the last
/// `max_items` acts are kept.
History history_before(const std::vector<ActEvent>& events, std::size_t pos,
                       std::size_t max_items = static_cast<std::size_t>(-1));

struct TrainOptions {
  int max_order = 3;
  double held_out_fraction = 0.1;
  std::uint64_t seed = 1;
  /// Held-out sets smaller than this use the fixed fallback weights.
  std::size_t min_held_out_events = 50;
  /// When set, used as-is instead of being estimated.
  std::optional<std::vector<double>> lambdas;
};

/// Interpolated conditional-frequency model over dialogue-act sequences with
/// direction-tagged histories. Immutable after training except through
/// observe(), which exists for incremental counting.
class NGramModel {
 public:
  static NGramModel train(const Corpus& corpus, const TrainOptions& options = {});

  /// Weights used when held-out data is too small; for three orders this is
  /// (0.1, 0.3, 0.6), in general proportional to 1, 3, 6, 10, ...
  static std::vector<double> fallback_lambdas(int max_order);

  static NGramModel from_json(const nlohmann::json& j);
  static NGramModel load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

  int max_order() const { return max_order_; }
  const ActInventory& inventory() const { return inventory_; }
  const std::vector<double>& lambdas() const { return lambdas_; }
  void set_lambdas(std::vector<double> lambdas);
  bool lambdas_estimated() const { return lambdas_estimated_; }
  std::size_t held_out_events() const { return held_out_events_; }

  /// Counts one more occurrence of `act` after `history` at every order.
  void observe(const History& history, const ActLabel& act);

  /// Full distribution over the inventory (sorted label order).
  std::vector<double> distribution(const History& history) const;
  double probability(const History& history, const ActLabel& act) const;
  /// Top min(k, |inventory|) acts; ties broken by act name.
  std::vector<Prediction> predict(const History& history, std::size_t k) const;

  /// Raw count of `act` after exactly the given (direction-tagged) context.
  std::size_t count(const History& context, const ActLabel& act) const;
  std::size_t context_total(const History& context) const;

  bool operator==(const NGramModel&) const = default;

 private:
  using Token = std::uint32_t;
  using Key = std::vector<Token>;
  struct ContextCounts {
    std::size_t total = 0;
    std::vector<std::size_t> per_act;
    bool operator==(const ContextCounts&) const = default;
  };

  NGramModel(ActInventory inventory, int max_order);

  Token token(const HistoryItem& item) const;
  Key key_of(const History& history, std::size_t begin, std::size_t end) const;
  void validate_history(const History& history) const;
  void count_dialogue(const Dialogue& dialogue);
  void add(const Key& key, std::size_t act);
  void distribution_into(const History& history, std::vector<double>& out) const;
  /// Relative frequency of `act` at each order (index 0 = unigram, add-one
  /// smoothed); nullopt where the context is too short or unseen.
  std::vector<std::optional<double>> order_frequencies(const History& history,
                                                       std::size_t act) const;

  ActInventory inventory_;
  int max_order_ = 3;
  std::vector<double> lambdas_;
  bool lambdas_estimated_ = false;
  std::size_t held_out_events_ = 0;
  std::map<Key, ContextCounts> counts_;

};

/// Fraction of utterance positions whose annotated act is among the model's
/// top-n predictions, given all preceding acts of the dialogue tagged with
/// the true speaker directions. Dialogues are scored in parallel.
double evaluate_topn(const NGramModel& model, const Corpus& corpus, std::size_t n);
/// Single-threaded reference that goes through predict().
double evaluate_topn_serial(const NGramModel& model, const Corpus& corpus, std::size_t n);

struct GapFiller {
  std::vector<ActLabel> acts;
  double score = 0.0;
};

/// Scores every filler sequence of `gap_length` acts (1..3) between the two
/// contexts and returns them best first (ties by act names). `left` carries
/// the direction into the gap on its last element; transitions inside the
/// gap and into right.front() use `within_gap`.
std::vector<GapFiller> estimate_gap(const NGramModel& model, const History& left,
                                    const History& right, int gap_length,
                                    DirectionTag within_gap = DirectionTag::same_speaker);

}  // namespace dlgctx
