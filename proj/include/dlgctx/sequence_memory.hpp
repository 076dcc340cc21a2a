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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dlgctx/corpus.hpp"
#include "dlgctx/phase.hpp"
#include "dlgctx/predictor.hpp"

namespace dlgctx {

using TrackName = std::string;

inline const TrackName kDeepTrack = "deep";
inline const TrackName kShallowTrack = "shallow";

struct UtteranceRecord {
  ActLabel act;
  std::optional<DialoguePhase> phase;
  /// Ranked predictions for the following utterance, keyed by the
  /// hypothesized speaker direction. Each list is sorted by descending
  /// probability.
  std::map<DirectionTag, std::vector<Prediction>> predictions;
  TrackName track;
  std::size_t turn_index = 0;
  std::size_t utterance_index = 0;
};

struct TurnRecord {
  ParticipantId speaker;
  std::string language;
  std::optional<TrackName> selected_track;
  std::size_t translated_count = 0;
  bool closed = false;
  std::map<TrackName, std::vector<UtteranceRecord>> utterances;

  /// Records of one track; empty when the track produced nothing.
  const std::vector<UtteranceRecord>& on(const TrackName& track) const;
};

/// A candidate reading for disambiguation. An empty `after_acts` set marks
/// the default reading.
struct ReadingCandidate {
  std::string reading;
  std::set<ActLabel> after_acts;
};

struct ReadingChoice {
  std::string reading;
  bool low_confidence = false;
};

/// Chronological store of turns and utterances, segmented independently per
/// analysis track. Single writer.
class SequenceMemory {
 public:
  /// Registers the deep and shallow tracks.
  SequenceMemory();
  explicit SequenceMemory(std::vector<TrackName> tracks);

  void register_track(const TrackName& track);
  bool has_track(const TrackName& track) const;
  const std::vector<TrackName>& tracks() const { return tracks_; }

  std::size_t begin_turn(const ParticipantId& speaker, const std::string& language);
  const UtteranceRecord& add_utterance(const TrackName& track, const ActLabel& act);
  const TurnRecord& close_turn(const TrackName& selected_track, std::size_t translated_count);

  /// Most recent min(n, available) records of `track` across turns, oldest
  /// first, each with its turn's speaker.
  std::vector<std::pair<ActLabel, ParticipantId>> last_acts(const TrackName& track, std::size_t n) const;

  /// First candidate whose set contains one of the last `window` acts on the
  /// track; otherwise the default candidate, otherwise the first candidate
  /// flagged as low confidence.
  ReadingChoice disambiguate_reading(const TrackName& track,
                                     const std::vector<ReadingCandidate>& candidates,
                                     std::size_t window = 1) const;

  const UtteranceRecord& annotate(std::size_t turn_index, std::size_t utterance_index,
                                  const TrackName& track, std::optional<DialoguePhase> phase,
                                  std::optional<std::vector<Prediction>> predictions,
                                  DirectionTag direction = DirectionTag::speaker_change);

  const std::vector<TurnRecord>& turns() const { return turns_; }
  std::optional<std::size_t> open_turn() const { return open_; }
  std::size_t record_count(const TrackName& track) const;

  /// One line per utterance record: turn, speaker, track, index, act, phase
  /// and the top `k` predictions per direction as per-mille integers.
  std::string snapshot(std::size_t k = 3) const;

 private:
  void require_track(const TrackName& track) const;

  std::vector<TrackName> tracks_;
  std::vector<TurnRecord> turns_;
  std::optional<std::size_t> open_;
};

}  // namespace dlgctx
