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

#include "dlgctx/sequence_memory.hpp"

#include <algorithm>
#include <sstream>

#include "dlgctx/error.hpp"

namespace dlgctx {

std::string to_string(DialoguePhase phase) {
  switch (phase) {
    case DialoguePhase::opening: return "opening";
    case DialoguePhase::negotiation: return "negotiation";
    case DialoguePhase::closing: return "closing";
  }
  return "?";
}

DialoguePhase parse_phase(const std::string& name) {
  if (name == "opening") return DialoguePhase::opening;
  if (name == "negotiation") return DialoguePhase::negotiation;
  if (name == "closing") return DialoguePhase::closing;
  throw FormatError("unknown dialogue phase '" + name + "'");
}

const std::vector<UtteranceRecord>& TurnRecord::on(const TrackName& track) const {
  static const std::vector<UtteranceRecord> kNone;
  auto it = utterances.find(track);
  return it == utterances.end() ? kNone : it->second;
}

SequenceMemory::SequenceMemory() : SequenceMemory({kDeepTrack, kShallowTrack}) {}

SequenceMemory::SequenceMemory(std::vector<TrackName> tracks) {
  for (auto& t : tracks) register_track(t);
}

void SequenceMemory::register_track(const TrackName& track) {
  if (track.empty()) throw PreconditionError("track name must not be empty");
  if (has_track(track)) throw PreconditionError("track '" + track + "' already registered");
  tracks_.push_back(track);
}

bool SequenceMemory::has_track(const TrackName& track) const {
  return std::find(tracks_.begin(), tracks_.end(), track) != tracks_.end();
}

void SequenceMemory::require_track(const TrackName& track) const {
  if (!has_track(track)) throw PreconditionError("unknown analysis track '" + track + "'");
}

std::size_t SequenceMemory::begin_turn(const ParticipantId& speaker, const std::string& language) {
  if (open_) throw PreconditionError("turn " + std::to_string(*open_) + " is still open");
  TurnRecord turn;
  turn.speaker = speaker;
  turn.language = language;
  turns_.push_back(std::move(turn));
  open_ = turns_.size() - 1;
  return *open_;
}

const UtteranceRecord& SequenceMemory::add_utterance(const TrackName& track, const ActLabel& act) {
  if (!open_) throw PreconditionError("no open turn");
  require_track(track);
  auto& list = turns_[*open_].utterances[track];
  UtteranceRecord rec;
  rec.act = act;
  rec.track = track;
  rec.turn_index = *open_;
  rec.utterance_index = list.size();
  list.push_back(std::move(rec));
  return list.back();
}

const TurnRecord& SequenceMemory::close_turn(const TrackName& selected_track, std::size_t translated_count) {
  if (!open_) throw PreconditionError("no open turn");
  require_track(selected_track);
  TurnRecord& turn = turns_[*open_];
  const std::size_t available = turn.on(selected_track).size();
  if (translated_count > available) {
    throw PreconditionError("translated count " + std::to_string(translated_count) + " exceeds the " +
                            std::to_string(available) + " utterances of track '" + selected_track + "'");
  }
  turn.selected_track = selected_track;
  turn.translated_count = translated_count;
  turn.closed = true;
  open_.reset();
  return turn;
}

std::vector<std::pair<ActLabel, ParticipantId>> SequenceMemory::last_acts(const TrackName& track,
                                                                          std::size_t n) const {
  require_track(track);
  std::vector<std::pair<ActLabel, ParticipantId>> out;
  for (auto t = turns_.rbegin(); t != turns_.rend() && out.size() < n; ++t) {
    const auto& list = t->on(track);
    for (auto u = list.rbegin(); u != list.rend() && out.size() < n; ++u) {
      out.emplace_back(u->act, t->speaker);
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

ReadingChoice SequenceMemory::disambiguate_reading(const TrackName& track,
                                                   const std::vector<ReadingCandidate>& candidates,
                                                   std::size_t window) const {
  if (candidates.empty()) throw PreconditionError("no reading candidates");
  const ReadingCandidate* fallback = nullptr;
  for (const auto& c : candidates) {
    if (!c.after_acts.empty()) continue;
    if (fallback) throw PreconditionError("more than one default reading");
    fallback = &c;
  }
  const auto recent = last_acts(track, std::max<std::size_t>(window, 1));
  for (const auto& c : candidates) {
    for (const auto& [act, speaker] : recent) {
      if (c.after_acts.count(act)) return {c.reading, false};
    }
  }
  if (fallback) return {fallback->reading, recent.empty()};
  return {candidates.front().reading, true};
}

const UtteranceRecord& SequenceMemory::annotate(std::size_t turn_index, std::size_t utterance_index,
                                                const TrackName& track, std::optional<DialoguePhase> phase,
                                                std::optional<std::vector<Prediction>> predictions,
                                                DirectionTag direction) {
  require_track(track);
  if (turn_index >= turns_.size()) throw PreconditionError("turn index out of range");
  auto it = turns_[turn_index].utterances.find(track);
  if (it == turns_[turn_index].utterances.end() || utterance_index >= it->second.size()) {
    throw PreconditionError("utterance index " + std::to_string(utterance_index) + " out of range");
  }
  UtteranceRecord& rec = it->second[utterance_index];
  if (predictions) {
    const bool sorted = std::is_sorted(predictions->begin(), predictions->end(),
                                       [](const Prediction& a, const Prediction& b) {
                                         return a.probability > b.probability;
                                       });
    if (!sorted) throw PreconditionError("predictions must be sorted by descending probability");
    rec.predictions[direction] = std::move(*predictions);
  }
  if (phase) rec.phase = phase;
  return rec;
}

std::size_t SequenceMemory::record_count(const TrackName& track) const {
  std::size_t n = 0;
  for (const auto& t : turns_) n += t.on(track).size();
  return n;
}

std::string SequenceMemory::snapshot(std::size_t k) const {
  std::ostringstream out;
  for (std::size_t t = 0; t < turns_.size(); ++t) {
    const TurnRecord& turn = turns_[t];
    for (const auto& track : tracks_) {
      for (const auto& rec : turn.on(track)) {
        out << t << '\t' << turn.speaker << '\t' << track << '\t' << rec.utterance_index << '\t'
            << rec.act << '\t' << (rec.phase ? to_string(*rec.phase) : "-");
        for (const auto& [dir, preds] : rec.predictions) {
          out << '\t' << to_string(dir) << ':';
          for (std::size_t i = 0; i < preds.size() && i < k; ++i) {
            out << (i ? "," : "") << preds[i].act << '=' << per_mille(preds[i].probability);
          }
        }
        out << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace dlgctx
