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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dlgctx/time_types.hpp"

namespace dlgctx {

using ActLabel = std::string;
using ParticipantId = std::string;

/// Closed, sorted set of dialogue-act labels.
class ActInventory {
 public:
  ActInventory() = default;
  explicit ActInventory(std::vector<ActLabel> labels);

  /// greet .. feedback_acknowledgement plus bye.
  static ActInventory default_inventory();

  bool contains(const ActLabel& act) const;
  /// Position in sorted order; nullopt for unknown acts.
  std::optional<std::size_t> index_of(const ActLabel& act) const;
  const ActLabel& at(std::size_t i) const { return labels_.at(i); }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const std::vector<ActLabel>& labels() const { return labels_; }

  bool operator==(const ActInventory&) const = default;

 private:
  std::vector<ActLabel> labels_;
};

struct Utterance {
  std::optional<std::string> text;
  ActLabel act;
  std::vector<TimeExpression> times;
  std::size_t index = 0;
  bool operator==(const Utterance&) const = default;
};

struct Turn {
  ParticipantId speaker;
  std::string language;
  std::vector<Utterance> utterances;
  bool operator==(const Turn&) const = default;
};

struct Dialogue {
  std::string id;
  SpeakingTime speaking_time;
  std::array<ParticipantId, 2> participants;
  std::vector<Turn> turns;

  std::size_t utterance_count() const;
  bool operator==(const Dialogue&) const = default;
};

struct Corpus {
  std::vector<Dialogue> dialogues;
  ActInventory act_inventory = ActInventory::default_inventory();

  std::size_t utterance_count() const;
  bool operator==(const Corpus&) const = default;
};

/// Reads and validates a corpus file. Errors name the file, and for record
/// problems also the dialogue id and turn index.
Corpus parse_corpus(const std::filesystem::path& path);
Corpus parse_corpus_json(const nlohmann::json& doc, const std::string& source = "<memory>");

/// Checks every invariant; throws ValidationError on the first violation.
void validate(const Corpus& corpus);

nlohmann::json to_json(const Corpus& corpus);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Deterministic dialogue-level partition into (train, held_out).
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double held_out_fraction,
                                       std::uint64_t seed);

}  // namespace dlgctx
