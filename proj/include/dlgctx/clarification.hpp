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
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dlgctx/time_types.hpp"

namespace dlgctx {

struct ConfusablePair {
  std::string a;
  std::string b;
  double similarity = 1.0;
  bool operator==(const ConfusablePair&) const = default;
};

using Lexicon = std::vector<ConfusablePair>;

/// 1 - Levenshtein distance / longer length, over UTF-8 code points.
double normalized_similarity(const std::string& a, const std::string& b);

/// Entries may omit "similarity"; it is then filled by normalized_similarity.
Lexicon lexicon_from_json(const nlohmann::json& j);
Lexicon load_lexicon(const std::filesystem::path& path);
/// Rejects a == b, repeated unordered pairs and similarities outside (0,1].
void validate(const Lexicon& lexicon);

struct ConfusableFlag {
  std::size_t position = 0;
  ConfusablePair pair;
};

/// Flags each token equal to a member of a pair whose similarity reaches
/// `threshold`, in position order (first matching pair per token).
std::vector<ConfusableFlag> detect_confusables(const std::vector<std::string>& tokens,
                                               const Lexicon& lexicon, double threshold);

struct ImplausibleDate {
  TimeDescription desc;
  std::string reason;
};
struct ConfusableTokens {
  std::size_t position = 0;
  ConfusablePair pair;
};
using Trigger = std::variant<ImplausibleDate, ConfusableTokens>;

/// A corrected description, or for confusables the alternative token.
using Proposal = std::variant<TimeDescription, std::string>;

std::string describe(const Trigger& trigger);
std::string describe(const Proposal& proposal);

/// Single-edit correction of an implausible description: an overlong day
/// clamps to the month's last day, a wrong weekday is dropped, an
/// out-of-range ISO week or interval bound clamps into range. nullopt when
/// no single edit makes the description plausible. Throws PreconditionError
/// for plausible input.
std::optional<TimeDescription> correct_date(const TimeDescription& desc, int reference_year);

/// Prompt line shown in interactive mode.
std::string clarification_prompt(const Proposal& proposal);

enum class Response : std::uint8_t { accept, reject };

/// Accept/reject automaton for system-initiated clarification. Triggers that
/// arrive while a confirmation is pending wait in FIFO order.
class ClarificationFSA {
 public:
  struct Idle {};
  struct AwaitingConfirmation {
    Trigger trigger;
    Proposal proposal;
  };
  struct Resolved {
    Proposal value;
  };
  struct RepeatRequested {
    Trigger trigger;
  };
  using State = std::variant<Idle, AwaitingConfirmation, Resolved, RepeatRequested>;

  const State& state() const { return state_; }
  bool idle() const { return std::holds_alternative<Idle>(state_); }
  bool awaiting() const { return std::holds_alternative<AwaitingConfirmation>(state_); }
  std::string state_name() const;

  /// Raises an implausible-date trigger. From Idle the automaton moves to
  /// AwaitingConfirmation, or straight to RepeatRequested when no single
  /// edit helps. Otherwise the trigger is queued. Throws PreconditionError
  /// for plausible input.
  const State& propose_correction(const TimeDescription& desc, int reference_year);
  /// Raises a confusable-token trigger proposing the pair's other member.
  const State& raise_confusable(const ConfusableFlag& flag, const std::string& token);

  /// accept -> Resolved(proposal); reject -> RepeatRequested. Throws
  /// PreconditionError outside AwaitingConfirmation.
  const State& step(Response response);

  /// Back to Idle from any state; pending triggers stay queued.
  void reset();
  /// From Idle, activates the oldest queued trigger. Returns false when the
  /// queue is empty.
  bool start_next();
  std::size_t pending() const { return queue_.size(); }

 private:
  struct Pending {
    Trigger trigger;
    std::optional<Proposal> proposal;
  };

  void activate(Pending p);

  State state_ = Idle{};
  std::deque<Pending> queue_;
};

std::string to_string(Response response);
nlohmann::json to_json(const Trigger& trigger);
nlohmann::json to_json(const Proposal& proposal);

}  // namespace dlgctx
