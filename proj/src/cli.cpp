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

#include "dlgctx/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dlgctx/clarification.hpp"
#include "dlgctx/corpus.hpp"
#include "dlgctx/engine.hpp"
#include "dlgctx/error.hpp"
#include "dlgctx/plan.hpp"
#include "dlgctx/predictor.hpp"

namespace dlgctx::cli {

using nlohmann::json;

namespace {

struct Options {
  std::string corpus;
  std::string model;
  std::string operators;
  std::string lexicon;
  std::string output;
  std::string speaking_time;
  std::string participants;
  std::string clarify_answer = "accept";
  std::string thematic_dump;
  std::string structure_dump;
  std::string snapshot;
  int max_order = 3;
  double held_out = 0.1;
  std::uint64_t seed = 1;
  std::size_t top_n = 3;
  std::size_t min_support = 2;
  double confusable_threshold = 0.7;
  bool no_clarify = false;
  bool serial = false;
};

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  if (!CLI::detail::lexical_cast(s, v)) return std::nullopt;
  return v;
}

const CLI::Validator kOpenUnit =
    CLI::Validator([](std::string& s) -> std::string {
      const auto v = parse_number(s);
      return v && *v > 0.0 && *v < 1.0 ? "" : "value must lie in (0,1)";
    }, "(0,1)");

const CLI::Validator kHalfOpenUnit =
    CLI::Validator([](std::string& s) -> std::string {
      const auto v = parse_number(s);
      return v && *v > 0.0 && *v <= 1.0 ? "" : "value must lie in (0,1]";
    }, "(0,1]");

Corpus load_nonempty_corpus(const std::string& path) {
  Corpus c = parse_corpus(path);
  if (c.dialogues.empty() || c.utterance_count() == 0) throw ValidationError(path + ": corpus contains no utterances");
  return c;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  return f;
}

int cmd_train(const Options& o, std::ostream& out) {
  const Corpus corpus = load_nonempty_corpus(o.corpus);
  TrainOptions t;
  t.max_order = o.max_order;
  t.held_out_fraction = o.held_out;
  t.seed = o.seed;
  const NGramModel model = NGramModel::train(corpus, t);
  model.save(o.model);
  out << "lambdas:";
  out << std::fixed << std::setprecision(6);
  for (double l : model.lambdas()) out << ' ' << l;
  if (model.lambdas_estimated()) {
    out << " (estimated on " << model.held_out_events() << " held-out events)\n";
  } else {
    out << " (fallback)\n";
  }
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const NGramModel model = NGramModel::load(o.model);
  const Corpus corpus = load_nonempty_corpus(o.corpus);
  const double rate = o.serial ? evaluate_topn_serial(model, corpus, o.top_n) : evaluate_topn(model, corpus, o.top_n);
  out << "top-" << o.top_n << " hit rate: " << std::fixed << std::setprecision(2) << rate * 100.0 << "%\n";
  return kExitOk;
}

int cmd_learn_ops(const Options& o, std::ostream& out) {
  const Corpus corpus = load_nonempty_corpus(o.corpus);
  const OperatorSet ops = learn_operators(corpus, o.min_support);
  save_operators(ops, o.output);
  out << ops.size() << " operators written to " << o.output << "\n";
  return kExitOk;
}

SessionConfig session_config(const Options& o) {
  SessionConfig c;
  c.prediction_k = o.top_n;
  c.clarification = !o.no_clarify;
  c.confusable_threshold = o.confusable_threshold;
  return c;
}

Response parse_answer(const std::string& s) {
  if (s == "accept" || s == "y") return Response::accept;
  if (s == "reject" || s == "n") return Response::reject;
  throw UsageError("clarification answer must be accept or reject, got '" + s + "'");
}

int cmd_replay(const Options& o, std::ostream& out) {
  const Response answer = parse_answer(o.clarify_answer);
  const Corpus corpus = load_nonempty_corpus(o.corpus);
  auto model = std::make_shared<const NGramModel>(NGramModel::load(o.model));
  const OperatorSet ops = o.operators.empty() ? OperatorSet{} : load_operators(o.operators);
  const Lexicon lex = o.lexicon.empty() ? Lexicon{} : load_lexicon(o.lexicon);

  std::ofstream file;
  if (!o.output.empty()) file = open_output(o.output);
  std::ostream& stream = o.output.empty() ? out : file;
  std::ostringstream thematic, structure, snapshot;

  for (const auto& d : corpus.dialogues) {
    Session s(d.speaking_time, model, ops, lex, session_config(o));
    for (const auto& turn : d.turns) {
      s.begin_turn(turn.speaker, turn.language);
      for (const auto& u : turn.utterances) {
        s.process_utterance(s.config().inference_track, u.act, u.times, u.text);
        while (s.clarification_pending()) s.respond(answer);
      }
      const TurnReport tr = s.process_turn_end(s.config().inference_track, turn.utterances.size());
      for (const auto& ur : tr.utterances) {
        json j = to_json(ur);
        j["dialogue"] = d.id;
        stream << j.dump() << '\n';
      }
      stream.flush();
    }
    thematic << "# " << d.id << '\n' << s.thematic().dump();
    structure << "# " << d.id << '\n' << s.structure().dump();
    snapshot << "# " << d.id << '\n' << s.memory().snapshot(o.top_n);
  }
  if (!o.thematic_dump.empty()) open_output(o.thematic_dump) << thematic.str();
  if (!o.structure_dump.empty()) open_output(o.structure_dump) << structure.str();
  if (!o.snapshot.empty()) open_output(o.snapshot) << snapshot.str();
  return kExitOk;
}

struct UttInput {
  std::vector<TimeExpression> times;
  std::optional<std::string> text;
};

UttInput parse_utt_payload(const std::string& payload) {
  UttInput u;
  if (payload.empty()) return u;
  json j;
  try {
    j = json::parse(payload);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("bad time expression JSON: ") + e.what());
  }
  if (j.is_object() && (j.contains("times") || j.contains("text"))) {
    if (j.contains("text")) u.text = j.at("text").get<std::string>();
    if (j.contains("times")) j = j.at("times");
    else return u;
  }
  if (j.is_array()) {
    for (const auto& e : j) u.times.push_back(time_expression_from_json(e));
  } else {
    u.times.push_back(time_expression_from_json(j));
  }
  return u;
}

// Prompts until the pending clarification is answered or input ends.
void answer_prompts(Session& s, std::istream& in, std::ostream& out) {
  while (s.clarification_pending()) {
    out << *s.pending_prompt() << std::endl;
    std::string line;
    if (!std::getline(in, line)) return;
    if (line == "y" || line == "n") {
      out << to_json(s.respond(line == "y" ? Response::accept : Response::reject)).dump() << '\n';
    }
  }
}

int cmd_interactive(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
  auto model = std::make_shared<const NGramModel>(NGramModel::load(o.model));
  const OperatorSet ops = o.operators.empty() ? OperatorSet{} : load_operators(o.operators);
  const Lexicon lex = o.lexicon.empty() ? Lexicon{} : load_lexicon(o.lexicon);
  std::vector<std::string> participants;
  if (!o.participants.empty()) {
    std::istringstream ps(o.participants);
    for (std::string p; std::getline(ps, p, ',');) participants.push_back(p);
  }
  Session s(parse_speaking_time(o.speaking_time), model, ops, lex, session_config(o));

  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string cmd;
    if (!(words >> cmd)) continue;
    try {
      if (cmd == "quit") break;
      if (cmd == "turn") {
        std::string speaker, lang = "de";
        if (!(words >> speaker)) throw UsageError("usage: turn <speaker> [lang]");
        words >> lang;
        if (!participants.empty() && std::find(participants.begin(), participants.end(), speaker) == participants.end()) {
          throw ValidationError("unknown participant '" + speaker + "'");
        }
        out << "turn " << s.begin_turn(speaker, lang) << '\n';
      } else if (cmd == "utt") {
        std::string act, payload;
        if (!(words >> act)) throw UsageError("usage: utt <act> [time-expression-json]");
        std::getline(words >> std::ws, payload);
        const UttInput u = parse_utt_payload(payload);
        out << to_json(s.process_utterance(s.config().inference_track, act, u.times, u.text)).dump() << '\n';
        answer_prompts(s, in, out);
      } else if (cmd == "end") {
        std::string track = s.config().inference_track;
        words >> track;
        std::size_t count = 0;
        if (!(words >> count)) {
          const auto open = s.memory().open_turn();
          count = open ? s.memory().turns()[*open].on(track).size() : 0;
        }
        const TurnReport tr = s.process_turn_end(track, count);
        out << to_json(tr).dump() << '\n';
      } else if (cmd == "query") {
        std::string kind;
        words >> kind;
        if (kind == "agreement") {
          out << to_json(std::get<TimeDescription>(s.query(AgreementQuery{}))).dump() << '\n';
        } else if (kind == "phase") {
          out << to_string(std::get<DialoguePhase>(s.query(PhaseQuery{}))) << '\n';
        } else if (kind == "predictions") {
          out << to_json(std::get<PredictionSet>(s.query(PredictionsQuery{}))).dump() << '\n';
        } else {
          throw UsageError("usage: query agreement|phase|predictions");
        }
      } else {
        throw UsageError("unknown command '" + cmd + "'");
      }
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
    } catch (const json::exception& e) {
      err << "error: " << e.what() << '\n';
    }
  }
  return kExitOk;
}

// Appends "--key value" for DLG_CONFIG entries the command line leaves unset.
void apply_config_defaults(CLI::App& app, std::vector<std::string>& args) {
  const char* path = std::getenv("DLG_CONFIG");
  if (!path || !*path || args.empty()) return;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args.front());
  } catch (const CLI::OptionNotFound&) {
    return;
  }
  std::ifstream f(path);
  if (!f) throw IoError(std::string("cannot open DLG_CONFIG file ") + path);
  json cfg;
  try {
    cfg = json::parse(f);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string(path) + ": " + e.what());
  }
  if (!cfg.is_object()) throw FormatError(std::string(path) + ": defaults must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt || std::find(args.begin(), args.end(), flag) != args.end()) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else {
      args.push_back(flag);
      args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::istream& in, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Dialogue context engine for appointment-scheduling dialogues", "dlgctx"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train the act predictor and print its interpolation weights");
  train->add_option("--corpus", o.corpus, "Annotated corpus (JSON)")->required();
  train->add_option("--model", o.model, "Model file to write")->required();
  train->add_option("--max-order", o.max_order, "Largest n-gram order")->check(CLI::Range(1, 8));
  train->add_option("--held-out", o.held_out, "Held-out fraction for weight estimation")->check(kOpenUnit);
  train->add_option("--seed", o.seed, "Seed of the held-out split");

  auto* eval = app.add_subcommand("eval", "Print the top-n prediction hit rate");
  eval->add_option("--model", o.model, "Trained model")->required();
  eval->add_option("--corpus", o.corpus, "Annotated corpus (JSON)")->required();
  eval->add_option("--top-n", o.top_n, "Number of ranked predictions")->check(CLI::PositiveNumber);
  eval->add_flag("--serial", o.serial, "Use the single-threaded reference evaluator");

  auto* learn = app.add_subcommand("learn-ops", "Mine turn-level plan operators");
  learn->add_option("--corpus", o.corpus, "Annotated corpus (JSON)")->required();
  learn->add_option("--output", o.output, "Operator file to write")->required();
  learn->add_option("--min-support", o.min_support, "Minimum number of supporting turns")->check(CLI::PositiveNumber);

  auto* replay = app.add_subcommand("replay", "Replay a corpus and stream one JSON report per utterance");
  replay->add_option("--corpus", o.corpus, "Annotated corpus (JSON)")->required();
  replay->add_option("--model", o.model, "Trained model")->required();
  replay->add_option("--operators", o.operators, "Plan operator file");
  replay->add_option("--lexicon", o.lexicon, "Confusable-token lexicon");
  replay->add_option("--output", o.output, "Write the stream here instead of stdout");
  replay->add_option("--top-n", o.top_n, "Predictions per direction")->check(CLI::PositiveNumber);
  replay->add_flag("--no-clarify", o.no_clarify, "Disable clarification");
  replay->add_option("--clarify-answer", o.clarify_answer, "Answer to clarification prompts")
      ->check(CLI::IsMember({"accept", "reject"}));
  replay->add_option("--confusable-threshold", o.confusable_threshold, "Similarity threshold")->check(kHalfOpenUnit);
  replay->add_option("--thematic-dump", o.thematic_dump, "Write the final thematic memory here");
  replay->add_option("--structure-dump", o.structure_dump, "Write the final intentional structure here");
  replay->add_option("--snapshot", o.snapshot, "Write the final sequence memory snapshot here");

  auto* inter = app.add_subcommand("interactive", "Step through a dialogue from standard input");
  inter->add_option("--model", o.model, "Trained model")->required();
  inter->add_option("--speaking-time", o.speaking_time, "YYYY-MM-DD[THH:MM]")->required();
  inter->add_option("--operators", o.operators, "Plan operator file");
  inter->add_option("--lexicon", o.lexicon, "Confusable-token lexicon");
  inter->add_option("--participants", o.participants, "Comma-separated speaker ids");
  inter->add_option("--top-n", o.top_n, "Predictions per direction")->check(CLI::PositiveNumber);
  inter->add_flag("--no-clarify", o.no_clarify, "Disable clarification");
  inter->add_option("--confusable-threshold", o.confusable_threshold, "Similarity threshold")->check(kHalfOpenUnit);

  try {
    std::vector<std::string> args = args_in;
    apply_config_defaults(app, args);
    std::vector<const char*> argv{"dlgctx"};
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (train->parsed()) return cmd_train(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (learn->parsed()) return cmd_learn_ops(o, out);
    if (replay->parsed()) return cmd_replay(o, out);
    return cmd_interactive(o, in, out, err);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "dlgctx: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "dlgctx: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "dlgctx: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "dlgctx: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace dlgctx::cli
