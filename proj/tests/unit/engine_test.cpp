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

#include <algorithm>
#include <filesystem>
#include <random>

#include "dlgctx/engine.hpp"
#include "dlgctx/error.hpp"
#include "oracles.hpp"

using namespace dlgctx;

namespace {

const SpeakingTime kJan10{1996, 1, 10, std::nullopt};

TimeDescription jan(int lo, int hi) {
  TimeDescription d;
  d.month = 1;
  d.from_to = FromTo{Level::day, lo, hi};
  return d;
}

TimeDescription md(int month, int day) {
  TimeDescription d;
  d.month = month;
  d.day = day;
  return d;
}

std::shared_ptr<const NGramModel> fig1_model() {
  static const auto m = std::make_shared<const NGramModel>(
      NGramModel::train(parse_corpus(std::filesystem::path(DLGCTX_DATA_DIR) / "fig1.json")));
  return m;
}

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

TEST_CASE("a rejection with a date rejects the focus and proposes the date") {
  Session s(kJan10, fig1_model());
  s.begin_turn("A", "de");
  const auto a = s.process_utterance(kDeepTrack, "suggest_support_date", {jan(15, 19)});
  CHECK(a.thematic == std::vector<std::string>{"proposed date1/month=1/day=FROM_TO(15,19)"});
  s.process_turn_end(std::nullopt, 1);
  s.begin_turn("B", "de");
  const auto b = s.process_utterance(kDeepTrack, "reject_date", {jan(11, 18)});
  CHECK(b.thematic == std::vector<std::string>{"rejected date1/month=1/day=FROM_TO(15,19)",
                                               "proposed date1/month=1/day=FROM_TO(11,18)"});
  CHECK(b.agreement.empty());
}

TEST_CASE("an utterance without dates touches only memory and predictions") {
  Session s(kJan10, fig1_model());
  s.begin_turn("A", "de");
  const auto r = s.process_utterance(kDeepTrack, "greet", {});
  CHECK(r.thematic.empty());
  CHECK(r.times.empty());
  CHECK(r.clarification.empty());
  CHECK(r.errors.empty());
  CHECK(r.predictions.size() == 2);
  CHECK(r.predictions.at(DirectionTag::same_speaker).size() == 3);
  CHECK(s.thematic().empty());
  CHECK(s.memory().turns()[0].on(kDeepTrack)[0].predictions.size() == 2);
}

TEST_CASE("bare acceptance needs something to accept") {
  Session s(kJan10, fig1_model());
  s.begin_turn("A", "de");
  const auto r = s.process_utterance(kDeepTrack, "accept_date", {});
  CHECK(r.thematic.empty());
  CHECK(r.warnings == std::vector<std::string>{"accept_date with empty thematic memory"});
  CHECK(s.process_utterance(kDeepTrack, "feedback_acknowledgement", {}).warnings.empty());
}

TEST_CASE("acknowledgement accepts only a pending proposal") {
  Session s(kJan10, fig1_model());
  s.begin_turn("A", "de");
  s.process_utterance(kDeepTrack, "suggest_support_date", {md(1, 16)});
  s.process_turn_end(std::nullopt, 1);
  s.begin_turn("B", "de");
  const auto ack = s.process_utterance(kDeepTrack, "feedback_acknowledgement", {});
  CHECK(ack.thematic == std::vector<std::string>{"accepted date1/month=1/day=16"});
  CHECK(ack.agreement == md(1, 16));
  CHECK(s.process_utterance(kDeepTrack, "feedback_acknowledgement", {}).thematic.empty());
  CHECK(s.process_utterance(kDeepTrack, "accept_date", {}).thematic.empty());
}

TEST_CASE("relative expressions resolve against the session's speaking time") {
  Session s(kJan10, fig1_model());
  s.begin_turn("A", "de");
  const auto r = s.process_utterance(kDeepTrack, "suggest_support_date", {RelativeTime{Level::week, 1, std::nullopt}});
  REQUIRE(r.times.size() == 1);
  CHECK(r.times[0].year == 1996);
  CHECK(r.times[0].week == 3);
}

TEST_CASE("implausible dates wait for clarification") {
  SUBCASE("accept inserts the corrected date") {
    Session s(kJan10, fig1_model());
    s.begin_turn("A", "de");
    const auto r = s.process_utterance(kDeepTrack, "suggest_support_date", {md(4, 31)});
    CHECK(r.thematic.empty());
    REQUIRE(r.clarification.size() == 1);
    CHECK(r.clarification[0].event == "raised");
    CHECK(s.clarification_pending());
    CHECK(s.pending_prompt() == "CLARIFY: did you mean April 30? [y/n]");
    CHECK(s.thematic().empty());
    const auto done = s.respond(Response::accept);
    CHECK(done.thematic == std::vector<std::string>{"proposed date1/month=4/day=30"});
    CHECK(done.clarification[0].event == "resolved");
    CHECK_FALSE(s.clarification_pending());
    const auto turn = s.process_turn_end(std::nullopt, 1);
    REQUIRE(turn.utterances.size() == 1);
    CHECK(turn.utterances[0].thematic == done.thematic);
  }
  SUBCASE("reject leaves the thematic memory untouched") {
    Session s(kJan10, fig1_model());
    s.begin_turn("A", "de");
    s.process_utterance(kDeepTrack, "suggest_support_date", {md(4, 31)});
    const auto done = s.respond(Response::reject);
    CHECK(done.thematic.empty());
    CHECK(done.clarification[0].event == "repeat_requested");
    CHECK(s.thematic().empty());
    CHECK(s.clarification().idle());
    CHECK_THROWS_AS(s.respond(Response::accept), PreconditionError);
  }
  SUBCASE("a second trigger queues behind the first") {
    Session s(kJan10, fig1_model());
    s.begin_turn("A", "de");
    const auto r = s.process_utterance(kDeepTrack, "suggest_support_date", {md(4, 31), md(6, 31)});
    REQUIRE(r.clarification.size() == 2);
    CHECK(r.clarification[1].event == "queued");
    s.respond(Response::accept);
    CHECK(s.pending_prompt() == "CLARIFY: did you mean June 30? [y/n]");
    s.respond(Response::accept);
    CHECK(s.thematic().roots().size() == 2);
    CHECK_FALSE(s.clarification_pending());
  }
  SUBCASE("without clarification the date is inserted with a warning") {
    SessionConfig cfg;
    cfg.clarification = false;
    Session s(kJan10, fig1_model(), {}, {}, cfg);
    s.begin_turn("A", "de");
    const auto r = s.process_utterance(kDeepTrack, "suggest_support_date", {md(4, 31)});
    CHECK(r.warnings == std::vector<std::string>{"implausible date: April has 30 days"});
    CHECK(r.thematic == std::vector<std::string>{"proposed date1/month=4/day=31"});
  }
}

TEST_CASE("confusable tokens raise a clarification without thematic effect") {
  Session s(kJan10, fig1_model(), {}, {{"dreizehnter", "dreißigster", 0.8}});
  s.begin_turn("A", "de");
  const auto r = s.process_utterance(kDeepTrack, "suggest_support_date", {}, std::string("am dreizehnter"));
  REQUIRE(r.clarification.size() == 1);
  CHECK(s.pending_prompt() == "CLARIFY: did you mean dreißigster? [y/n]");
  const auto done = s.respond(Response::accept);
  CHECK(done.thematic.empty());
  CHECK(s.thematic().empty());
}

TEST_CASE("shallow records drive no inference") {
  Session s(kJan10, fig1_model());
  s.begin_turn("A", "de");
  const auto r = s.process_utterance(kShallowTrack, "suggest_support_date", {md(1, 16)});
  CHECK(r.thematic.empty());
  CHECK(r.predictions.empty());
  CHECK(s.thematic().empty());
  CHECK_THROWS_AS(s.process_utterance("other", "greet", {}), PreconditionError);
}

TEST_CASE("failing stages are reported and later stages still run") {
  const auto tiny = std::make_shared<const NGramModel>(NGramModel::train(
      testsupport::corpus_of({testsupport::alternating("1", {"greet", "bye"})}, {"greet", "bye"})));
  Session s(kJan10, tiny);
  s.begin_turn("A", "de");
  const auto r = s.process_utterance(kDeepTrack, "suggest_support_date", {md(1, 16)});
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].stage == "predict");
  CHECK(r.thematic == std::vector<std::string>{"proposed date1/month=1/day=16"});
  const auto turn = s.process_turn_end(std::nullopt, 1);
  CHECK(turn.subtree.has_value());
  CHECK(turn.phase == DialoguePhase::negotiation);
}

TEST_CASE("turn end builds structure and back-annotates phases") {
  const auto ops = load_operators(std::filesystem::path(DLGCTX_DATA_DIR) / "fig1_operators.json");
  Session s(kJan10, fig1_model(), ops);
  CHECK(std::get<DialoguePhase>(s.query(PhaseQuery{})) == DialoguePhase::opening);
  CHECK_THROWS_AS(s.process_turn_end(std::nullopt, 0), PreconditionError);
  CHECK_THROWS_AS(s.process_utterance(kDeepTrack, "greet", {}), PreconditionError);
  s.begin_turn("A", "de");
  s.process_utterance(kDeepTrack, "greet", {});
  s.process_utterance(kDeepTrack, "introduce_name", {});
  s.process_utterance(kDeepTrack, "init_date", {});
  s.process_utterance(kDeepTrack, "suggest_support_date", {jan(15, 19)});
  const auto t = s.process_turn_end(kDeepTrack, 4);
  CHECK(t.phase == DialoguePhase::opening);
  CHECK_FALSE(t.phase_repair);
  REQUIRE(t.utterances.size() == 4);
  CHECK(t.utterances[0].phase == DialoguePhase::opening);
  CHECK(t.utterances[3].phase == DialoguePhase::negotiation);
  CHECK(s.memory().turns()[0].on(kDeepTrack)[2].phase == DialoguePhase::negotiation);
  CHECK(s.structure().leaves().size() == 4);
  const auto j = to_json(t);
  CHECK(j["leaves"].size() == 4);
  CHECK(j["phase"] == "opening");
}

TEST_CASE("queries dispatch without mutating") {
  Session s(kJan10, fig1_model());
  s.begin_turn("A", "de");
  s.process_utterance(kDeepTrack, "suggest_support_date", {md(1, 16)});
  const auto before = s.thematic().dump();
  const auto both = std::get<PredictionSet>(s.query(PredictionsQuery{}));
  CHECK(both.size() == 2);
  const auto one = std::get<PredictionSet>(s.query(PredictionsQuery{DirectionTag::speaker_change, 5}));
  REQUIRE(one.size() == 1);
  CHECK(one.at(DirectionTag::speaker_change).size() == 5);
  CHECK_THROWS_AS(s.query(PredictionsQuery{DirectionTag::dialogue_start, 1}), PreconditionError);
  CHECK(std::get<Successor>(s.query(SuccessorQuery{md(1, 11)})) == Successor::next);
  const std::vector<ReadingCandidate> bei_ihnen = {{"temporal", {"suggest_support_date"}}, {"locative", {}}};
  CHECK(std::get<ReadingChoice>(s.query(ReadingQuery{bei_ihnen, 1})).reading == "temporal");
  CHECK(std::get<TimeDescription>(s.query(AgreementQuery{})).empty());
  CHECK(s.thematic().dump() == before);

  Session no_model(kJan10, nullptr);
  CHECK_THROWS_AS(no_model.query(PredictionsQuery{}), PreconditionError);
}

TEST_CASE("configuration is validated") {
  SessionConfig bad;
  bad.prediction_k = 0;
  CHECK_THROWS_AS(Session(kJan10, nullptr, {}, {}, bad), PreconditionError);
  bad = {};
  bad.confusable_threshold = 0.0;
  CHECK_THROWS_AS(Session(kJan10, nullptr, {}, {}, bad), PreconditionError);
  CHECK_THROWS_AS(Session(kJan10, nullptr, {}, {{"x", "x", 0.5}}), ValidationError);
  OperatorSet unknown = {{"U", OperatorLevel::turn, {"no_such_act"}, std::nullopt, OperatorKind::hand_coded, 0}};
  CHECK_THROWS_AS(Session(kJan10, fig1_model(), unknown), ValidationError);
}

namespace {

struct Step {
  ParticipantId speaker;
  std::vector<std::pair<ActLabel, std::vector<TimeExpression>>> utterances;
};

std::vector<Step> random_script(std::mt19937_64& rng) {
  const std::vector<ActLabel> acts = {"greet", "suggest_support_date", "accept_date", "reject_date",
                                      "feedback_acknowledgement", "request_comment_date", "bye"};
  std::vector<Step> script;
  for (int t = 0, n = 1 + static_cast<int>(rng() % 8); t < n; ++t) {
    Step step{t % 2 ? "B" : "A", {}};
    for (int u = 0, m = 1 + static_cast<int>(rng() % 3); u < m; ++u) {
      std::vector<TimeExpression> times;
      if (rng() % 2) times.push_back(md(1 + static_cast<int>(rng() % 3), 1 + static_cast<int>(rng() % 28)));
      if (rng() % 5 == 0) times.push_back(RelativeTime{Level::day, static_cast<int>(rng() % 5), std::nullopt});
      step.utterances.push_back({acts[rng() % acts.size()], times});
    }
    script.push_back(std::move(step));
  }
  return script;
}

std::vector<nlohmann::json> run(const std::vector<Step>& script, const SessionConfig& cfg) {
  Session s(kJan10, fig1_model(), {}, {}, cfg);
  std::vector<nlohmann::json> out;
  std::size_t leaves = 0;
  for (const auto& step : script) {
    s.begin_turn(step.speaker, "de");
    for (const auto& [act, times] : step.utterances) s.process_utterance(kDeepTrack, act, times);
    const auto t = s.process_turn_end(std::nullopt, step.utterances.size());
    for (const auto& u : t.utterances) out.push_back(to_json(u));
    out.push_back(to_json(t));
    leaves += step.utterances.size();
    REQUIRE(s.structure().leaves().size() == leaves);
    std::size_t recorded = 0;
    for (const auto& turn : s.memory().turns()) recorded += turn.on(kDeepTrack).size();
    REQUIRE(recorded == s.structure().root().leaf_count());
  }
  out.push_back(s.thematic().dump());
  return out;
}

}  // namespace

TEST_CASE("replay is deterministic and clarification is a no-op on plausible input") {
  std::mt19937_64 rng(41);
  SessionConfig off;
  off.clarification = false;
  for (int round = 0; round < 100; ++round) {
    const auto script = random_script(rng);
    const auto a = run(script, {});
    REQUIRE(a == run(script, {}));
    REQUIRE(a == run(script, off));
  }
}
