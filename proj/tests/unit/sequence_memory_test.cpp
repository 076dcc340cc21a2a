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

#include <doctest.h>

#include <random>

#include "dlgctx/error.hpp"
#include "dlgctx/sequence_memory.hpp"

using namespace dlgctx;

namespace {

void add_all(SequenceMemory& m, const TrackName& track, const std::vector<ActLabel>& acts) {
  for (const auto& a : acts) m.add_utterance(track, a);
}

// A01 and B02 of the example dialogue on the deep track.
SequenceMemory opening() {
  SequenceMemory m;
  m.begin_turn("A", "de");
  add_all(m, kDeepTrack, {"greet", "introduce_name"});
  m.close_turn(kDeepTrack, 2);
  m.begin_turn("B", "de");
  add_all(m, kDeepTrack, {"greet", "introduce_name", "init_date", "suggest_support_date"});
  return m;
}

const std::vector<ReadingCandidate> kBeiIhnen = {
    {"temporal", {"suggest_support_date", "request_comment_date"}},
    {"locative", {}},
};

}  // namespace

TEST_CASE("turn indices") {
  SequenceMemory m;
  CHECK(m.begin_turn("A", "de") == 0);
  CHECK_THROWS_AS(m.begin_turn("B", "de"), PreconditionError);
  m.close_turn(kDeepTrack, 0);
  CHECK(m.begin_turn("B", "de") == 1);
  m.close_turn(kDeepTrack, 0);
  CHECK(m.begin_turn("A", "en") == 2);
  m.close_turn(kDeepTrack, 0);
  CHECK(m.begin_turn("B", "de") == 3);
}

TEST_CASE("tracks are segmented independently") {
  SequenceMemory m;
  m.begin_turn("B", "de");
  add_all(m, kDeepTrack, {"greet", "introduce_name", "init_date", "suggest_support_date"});
  add_all(m, kShallowTrack, {"greet", "init_date"});
  const auto& t = m.turns()[0];
  CHECK(t.on(kDeepTrack).size() == 4);
  CHECK(t.on(kShallowTrack).size() == 2);
  CHECK(t.on(kShallowTrack)[1].act == "init_date");
  CHECK(t.on(kShallowTrack)[1].utterance_index == 1);
  CHECK_THROWS_AS(m.add_utterance("x", "greet"), PreconditionError);
  m.register_track("x");
  CHECK(m.add_utterance("x", "greet").track == "x");
}

TEST_CASE("close metadata") {
  SequenceMemory m = opening();
  CHECK_THROWS_AS(m.close_turn(kDeepTrack, 5), PreconditionError);
  const auto& t = m.close_turn(kDeepTrack, 4);
  CHECK(t.translated_count == 4);
  CHECK(t.selected_track == kDeepTrack);
  CHECK(t.closed);
  CHECK_THROWS_AS(m.close_turn(kDeepTrack, 0), PreconditionError);
  CHECK_THROWS_AS(m.add_utterance(kDeepTrack, "greet"), PreconditionError);

  SequenceMemory z;
  z.begin_turn("A", "de");
  z.add_utterance(kDeepTrack, "greet");
  CHECK(z.close_turn(kDeepTrack, 0).translated_count == 0);
}

TEST_CASE("last acts cross turn boundaries") {
  SequenceMemory m = opening();
  const auto two = m.last_acts(kDeepTrack, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0] == std::pair<ActLabel, ParticipantId>{"init_date", "B"});
  CHECK(two[1] == std::pair<ActLabel, ParticipantId>{"suggest_support_date", "B"});
  CHECK(m.last_acts(kDeepTrack, 100).size() == 6);
  CHECK(m.last_acts(kDeepTrack, 5).front().second == "A");
  CHECK(SequenceMemory{}.last_acts(kDeepTrack, 3).empty());
  CHECK_THROWS_AS(m.last_acts("nope", 1), PreconditionError);
}

TEST_CASE("reading disambiguation") {
  SequenceMemory m;
  CHECK(m.disambiguate_reading(kDeepTrack, kBeiIhnen).reading == "locative");
  CHECK(m.disambiguate_reading(kDeepTrack, kBeiIhnen).low_confidence);

  m.begin_turn("A", "de");
  m.add_utterance(kDeepTrack, "suggest_support_date");
  auto r = m.disambiguate_reading(kDeepTrack, kBeiIhnen);
  CHECK(r.reading == "temporal");
  CHECK_FALSE(r.low_confidence);

  SequenceMemory g;
  g.begin_turn("A", "de");
  g.add_utterance(kDeepTrack, "greet");
  r = g.disambiguate_reading(kDeepTrack, kBeiIhnen);
  CHECK(r.reading == "locative");
  CHECK_FALSE(r.low_confidence);

  const std::vector<ReadingCandidate> no_default = {{"temporal", {"suggest_support_date"}}, {"x", {"uptake"}}};
  r = g.disambiguate_reading(kDeepTrack, no_default);
  CHECK(r.reading == "temporal");
  CHECK(r.low_confidence);

  CHECK_THROWS_AS(g.disambiguate_reading(kDeepTrack, {}), PreconditionError);
  CHECK_THROWS_AS(g.disambiguate_reading(kDeepTrack, {{"a", {}}, {"b", {}}}), PreconditionError);

  g.add_utterance(kDeepTrack, "uptake");
  CHECK(g.disambiguate_reading(kDeepTrack, kBeiIhnen).reading == "locative");
  CHECK(g.disambiguate_reading(kDeepTrack, {{"t", {"greet"}}, {"d", {}}}, 2).reading == "t");
}

TEST_CASE("annotation") {
  SequenceMemory m = opening();
  CHECK(m.annotate(1, 0, kDeepTrack, DialoguePhase::opening, std::nullopt).phase == DialoguePhase::opening);
  CHECK(m.annotate(1, 0, kDeepTrack, DialoguePhase::negotiation, std::nullopt).phase == DialoguePhase::negotiation);
  const auto& rec = m.annotate(1, 1, kDeepTrack, std::nullopt, std::vector<Prediction>{});
  CHECK(rec.predictions.count(DirectionTag::speaker_change) == 1);
  CHECK(rec.predictions.at(DirectionTag::speaker_change).empty());
  CHECK_THROWS_AS(m.annotate(1, 9, kDeepTrack, DialoguePhase::opening, std::nullopt), PreconditionError);
  CHECK_THROWS_AS(m.annotate(7, 0, kDeepTrack, DialoguePhase::opening, std::nullopt), PreconditionError);
  const std::vector<Prediction> unsorted = {{"greet", 0.1}, {"bye", 0.5}};
  CHECK_THROWS_AS(m.annotate(1, 0, kDeepTrack, std::nullopt, unsorted), PreconditionError);
}

TEST_CASE("snapshot lines") {
  SequenceMemory m = opening();
  m.annotate(1, 3, kDeepTrack, DialoguePhase::negotiation,
             std::vector<Prediction>{{"uptake", 0.4321}, {"bye", 0.1}}, DirectionTag::speaker_change);
  const std::string snap = m.snapshot(1);
  CHECK(snap.find("1\tB\tdeep\t3\tsuggest_support_date\tnegotiation\tspeaker_change:uptake=432\n") !=
        std::string::npos);
  CHECK(snap.find("0\tA\tdeep\t0\tgreet\t-\n") != std::string::npos);
}

TEST_CASE("per-track lists equal the add subsequence under random interleavings") {
  std::mt19937_64 rng(5);
  const std::vector<TrackName> tracks = {kDeepTrack, kShallowTrack, "third"};
  const std::vector<ActLabel> acts = {"greet", "uptake", "bye"};
  for (int round = 0; round < 50; ++round) {
    SequenceMemory m;
    m.register_track("third");
    std::map<std::pair<std::size_t, TrackName>, std::vector<ActLabel>> expected;
    for (int step = 0; step < 60; ++step) {
      const auto r = rng() % 10;
      if (!m.open_turn()) {
        m.begin_turn(r % 2 ? "A" : "B", "de");
      } else if (r == 0) {
        m.close_turn(kDeepTrack, 0);
      } else {
        const auto& track = tracks[rng() % tracks.size()];
        const auto& act = acts[rng() % acts.size()];
        m.add_utterance(track, act);
        expected[{*m.open_turn(), track}].push_back(act);
      }
    }
    for (std::size_t t = 0; t < m.turns().size(); ++t) {
      for (const auto& track : tracks) {
        std::vector<ActLabel> got;
        for (const auto& rec : m.turns()[t].on(track)) got.push_back(rec.act);
        CHECK(got == expected[{t, track}]);
      }
    }
    for (std::size_t n = 0; n < 10; ++n) {
      const auto shorter = m.last_acts(kDeepTrack, n);
      const auto longer = m.last_acts(kDeepTrack, n + 1);
      REQUIRE(shorter.size() <= longer.size());
      CHECK(std::equal(shorter.begin(), shorter.end(), longer.end() - static_cast<std::ptrdiff_t>(shorter.size())));
    }
    CHECK(m.disambiguate_reading(kDeepTrack, kBeiIhnen).reading ==
          m.disambiguate_reading(kDeepTrack, kBeiIhnen).reading);
  }
}
