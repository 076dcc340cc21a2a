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

#include "dlgctx/engine.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "dlgctx/error.hpp"

namespace dlgctx {

using nlohmann::json;

namespace {

bool is_acceptance(const ActLabel& act) { return act == "accept_date" || act == "feedback_acknowledgement"; }

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    while (!tok.empty() && std::string(",.;:!?\"'").find(tok.back()) != std::string::npos) tok.pop_back();
    while (!tok.empty() && std::string("\"'(").find(tok.front()) != std::string::npos) tok.erase(0, 1);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

json proposal_detail(const Trigger& trigger, const std::optional<Proposal>& proposal) {
  json j = {{"trigger", to_json(trigger)}};
  if (proposal) j["proposal"] = to_json(*proposal);
  return j;
}

ClarificationEvent event_for(const ClarificationFSA::State& state) {
  if (const auto* a = std::get_if<ClarificationFSA::AwaitingConfirmation>(&state)) {
    return {"raised", proposal_detail(a->trigger, a->proposal)};
  }
  if (const auto* r = std::get_if<ClarificationFSA::Resolved>(&state)) {
    return {"resolved", {{"value", to_json(r->value)}}};
  }
  if (const auto* r = std::get_if<ClarificationFSA::RepeatRequested>(&state)) {
    return {"repeat_requested", {{"trigger", to_json(r->trigger)}}};
  }
  return {"idle", json::object()};
}

}  // namespace

Session::Session(SpeakingTime speaking_time, std::shared_ptr<const NGramModel> model, OperatorSet operators,
                 Lexicon lexicon, SessionConfig config)
    : speaking_time_(speaking_time),
      model_(std::move(model)),
      operators_(std::move(operators)),
      lexicon_(std::move(lexicon)),
      config_(std::move(config)) {
  if (!memory_.has_track(config_.inference_track)) memory_.register_track(config_.inference_track);
  if (config_.prediction_k == 0) throw PreconditionError("prediction k must be positive");
  if (!(config_.confusable_threshold > 0.0 && config_.confusable_threshold <= 1.0)) {
    throw PreconditionError("confusable threshold must lie in (0,1]");
  }
  validate_operators(operators_, model_ ? &model_->inventory() : nullptr);
  validate(lexicon_);
}

std::size_t Session::begin_turn(const ParticipantId& speaker, const std::string& language) {
  open_reports_.clear();
  return memory_.begin_turn(speaker, language);
}

std::optional<std::string> Session::pending_prompt() const {
  if (const auto* a = std::get_if<ClarificationFSA::AwaitingConfirmation>(&fsa_.state())) {
    return clarification_prompt(a->proposal);
  }
  return std::nullopt;
}

void Session::apply_stance(const TimeDescription& desc, const ActLabel& act, const ParticipantId& speaker,
                           std::size_t turn_index, UtteranceReport& report) {
  Stance stance = Stance::proposed;
  if (act == "reject_date") {
    // A rejection naming a date rejects the focus and proposes the date.
    if (const auto focus = thematic_.focus()) {
      const Attitude* last = thematic_.node(*focus).latest();
      if (last && last->speaker != speaker) {
        thematic_.add_attitude(*focus, Stance::rejected, speaker, turn_index);
        report.thematic.push_back("rejected " + thematic_.path_string(*focus));
      }
    }
  }
  if (is_acceptance(act)) {
    stance = Stance::accepted;
  } else {
    for (NodeId id : thematic_.infer_implicit_rejection(desc, speaker, turn_index)) {
      report.thematic.push_back("rejected(implicit) " + thematic_.path_string(id));
    }
  }
  const auto touched = thematic_.insert(desc, stance, speaker, turn_index);
  report.thematic.push_back(to_string(stance) + " " + thematic_.path_string(touched.back()));
}

void Session::apply_bare_act(const ActLabel& act, const ParticipantId& speaker, std::size_t turn_index,
                             UtteranceReport& report) {
  const bool accept = act == "accept_date";
  const bool ack = act == "feedback_acknowledgement";
  const bool reject = act == "reject_date";
  if (!accept && !ack && !reject) return;
  const auto focus = thematic_.focus();
  if (!focus) {
    if (!ack) report.warnings.push_back(act + " with empty thematic memory");
    return;
  }
  const Attitude* last = thematic_.node(*focus).latest();
  Stance stance = Stance::accepted;
  if (accept) {
    if (last && last->stance == Stance::accepted && last->speaker == speaker) return;
  } else if (ack) {
    if (!last || last->stance != Stance::proposed) return;
  } else {
    stance = Stance::rejected;
    if (last && last->stance == Stance::rejected && last->speaker == speaker) return;
  }
  thematic_.add_attitude(*focus, stance, speaker, turn_index);
  report.thematic.push_back(to_string(stance) + " " + thematic_.path_string(*focus));
}

// Applies finished clarifications and activates queued ones until the
// automaton is idle or waiting for an answer.
void Session::settle(UtteranceReport& report) {
  while (!fsa_.idle() && !fsa_.awaiting()) {
    report.clarification.push_back(event_for(fsa_.state()));
    Held held = std::move(held_.front());
    held_.pop_front();
    if (const auto* r = std::get_if<ClarificationFSA::Resolved>(&fsa_.state()); r && held) {
      if (const auto* desc = std::get_if<TimeDescription>(&r->value)) {
        try {
          apply_stance(*desc, held->act, held->speaker, held->turn_index, report);
        } catch (const Error& e) {
          report.errors.push_back({"thematic", e.what()});
        }
      }
    }
    fsa_.reset();
    if (fsa_.start_next() && fsa_.awaiting()) report.clarification.push_back(event_for(fsa_.state()));
  }
}

History Session::recent_history(std::size_t n) const {
  const auto acts = memory_.last_acts(config_.inference_track, n);
  History h;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const DirectionTag dir = i + 1 < acts.size() ? direction_between(acts[i].second, acts[i + 1].second)
                                                 : DirectionTag::speaker_change;
    h.push_back({acts[i].first, dir});
  }
  return h;
}

PredictionSet Session::predictions(std::size_t k) const {
  PredictionSet out;
  if (!model_) return out;
  History h = recent_history(static_cast<std::size_t>(std::max(model_->max_order() - 1, 0)));
  for (DirectionTag dir : {DirectionTag::same_speaker, DirectionTag::speaker_change}) {
    if (!h.empty()) h.back().direction = dir;
    out[dir] = model_->predict(h, k);
  }
  return out;
}

UtteranceReport Session::process_utterance(const TrackName& track, const ActLabel& act,
                                           const std::vector<TimeExpression>& times,
                                           const std::optional<std::string>& text) {
  const auto turn_index = memory_.open_turn();
  if (!turn_index) throw PreconditionError("no open turn");
  const UtteranceRecord& rec = memory_.add_utterance(track, act);
  UtteranceReport report;
  report.turn_index = *turn_index;
  report.utterance_index = rec.utterance_index;
  report.speaker = memory_.turns()[*turn_index].speaker;
  report.track = track;
  report.act = act;

  if (track == config_.inference_track) {
    if (times.empty()) {
      try {
        apply_bare_act(act, report.speaker, *turn_index, report);
      } catch (const Error& e) {
        report.errors.push_back({"thematic", e.what()});
      }
    }
    for (const auto& expr : times) {
      try {
        TimeDescription desc = std::holds_alternative<RelativeTime>(expr)
                                   ? resolve_relative(std::get<RelativeTime>(expr), speaking_time_)
                                   : std::get<TimeDescription>(expr);
        desc = thematic_.contextualize(desc);
        report.times.push_back(desc);
        const auto verdict = check_plausibility(desc, speaking_time_.year);
        if (!verdict.plausible) {
          if (config_.clarification) {
            const bool was_idle = fsa_.idle();
            held_.push_back(HeldInsert{act, report.speaker, *turn_index});
            fsa_.propose_correction(desc, speaking_time_.year);
            if (was_idle) {
              report.clarification.push_back(event_for(fsa_.state()));
              settle(report);
            } else {
              report.clarification.push_back({"queued", {{"trigger", to_json(Trigger{ImplausibleDate{desc, verdict.reason}})}}});
            }
            continue;
          }
          report.warnings.push_back("implausible date: " + verdict.reason);
        }
        apply_stance(desc, act, report.speaker, *turn_index, report);
      } catch (const Error& e) {
        report.errors.push_back({"thematic", e.what()});
      }
    }

    if (config_.clarification && text && !lexicon_.empty()) {
      try {
        const auto tokens = tokenize(*text);
        for (const auto& flag : detect_confusables(tokens, lexicon_, config_.confusable_threshold)) {
          const bool was_idle = fsa_.idle();
          held_.push_back(std::nullopt);
          fsa_.raise_confusable(flag, tokens[flag.position]);
          if (was_idle) {
            report.clarification.push_back(event_for(fsa_.state()));
          } else {
            report.clarification.push_back(
                {"queued", {{"trigger", to_json(Trigger{ConfusableTokens{flag.position, flag.pair}})}}});
          }
        }
      } catch (const Error& e) {
        report.errors.push_back({"clarification", e.what()});
      }
    }

    try {
      report.predictions = predictions(config_.prediction_k);
      for (const auto& [dir, preds] : report.predictions) {
        memory_.annotate(report.turn_index, report.utterance_index, track, std::nullopt, preds, dir);
      }
    } catch (const Error& e) {
      report.predictions.clear();
      report.errors.push_back({"predict", e.what()});
    }
  }
  report.agreement = thematic_.current_agreement();
  open_reports_.push_back(report);
  return report;
}

UtteranceReport Session::respond(Response response) {
  if (!fsa_.awaiting()) throw PreconditionError("no clarification is awaiting an answer");
  UtteranceReport report;
  if (!open_reports_.empty()) {
    const auto& last = open_reports_.back();
    report.turn_index = last.turn_index;
    report.utterance_index = last.utterance_index;
    report.speaker = last.speaker;
    report.track = last.track;
    report.act = last.act;
  }
  fsa_.step(response);
  settle(report);
  report.agreement = thematic_.current_agreement();
  if (!open_reports_.empty()) {
    auto& last = open_reports_.back();
    last.thematic.insert(last.thematic.end(), report.thematic.begin(), report.thematic.end());
    last.clarification.insert(last.clarification.end(), report.clarification.begin(), report.clarification.end());
    last.errors.insert(last.errors.end(), report.errors.begin(), report.errors.end());
    last.agreement = report.agreement;
  }
  return report;
}

TurnReport Session::process_turn_end(const std::optional<TrackName>& selected_track,
                                     std::size_t translated_count) {
  const auto open = memory_.open_turn();
  if (!open) throw PreconditionError("no open turn");
  const TurnRecord& rec = memory_.close_turn(selected_track.value_or(config_.inference_track), translated_count);
  TurnReport report;
  report.turn_index = *open;
  report.speaker = rec.speaker;
  report.phase = structure_.current_phase();

  const auto& records = rec.on(config_.inference_track);
  if (!records.empty()) {
    std::vector<ActLabel> acts;
    for (const auto& r : records) acts.push_back(r.act);
    try {
      PlanNode subtree = recognize_turn(acts, operators_);
      subtree.label = "turn " + std::to_string(*open) + " " + rec.speaker;
      if (model_) {
        const std::size_t context = static_cast<std::size_t>(std::max(model_->max_order() - 1, 0));
        auto before = memory_.last_acts(config_.inference_track, acts.size() + context);
        before.resize(before.size() - acts.size());
        History preceding;
        for (std::size_t i = 0; i < before.size(); ++i) {
          const auto& next_speaker = i + 1 < before.size() ? before[i + 1].second : rec.speaker;
          preceding.push_back({before[i].first, direction_between(before[i].second, next_speaker)});
        }
        for (std::size_t ci = 0; ci < subtree.children.size(); ++ci) {
          if (subtree.children[ci].kind != PlanNodeKind::repair) continue;
          try {
            repair_and_estimate(subtree, ci, *model_, preceding);
          } catch (const Error& e) {
            report.errors.push_back({"repair", e.what()});
          }
        }
      }
      const auto attached = structure_.attach_turn(subtree);
      report.phase = attached.phase;
      report.phase_repair = attached.phase_repair;
      const auto phases = leaf_phases(subtree);
      for (std::size_t i = 0; i < records.size(); ++i) {
        memory_.annotate(*open, i, config_.inference_track, phases[i], std::nullopt);
      }
      report.subtree = std::move(subtree);
    } catch (const Error& e) {
      report.errors.push_back({"plan", e.what()});
    }
  }

  for (auto& r : open_reports_) {
    if (r.track != config_.inference_track) continue;
    r.phase = memory_.turns()[*open].on(config_.inference_track).at(r.utterance_index).phase;
  }
  report.utterances = std::move(open_reports_);
  open_reports_.clear();
  return report;
}

Answer Session::query(const Query& q) const {
  return std::visit(
      [this](const auto& arg) -> Answer {
        using T = std::decay_t<decltype(arg)>;
        if constexpr (std::is_same_v<T, PredictionsQuery>) {
          if (!model_) throw PreconditionError("no prediction model loaded");
          PredictionSet all = predictions(arg.k == 0 ? config_.prediction_k : arg.k);
          if (arg.direction) {
            if (*arg.direction == DirectionTag::dialogue_start) {
              throw PreconditionError("predictions are queried for same_speaker or speaker_change");
            }
            return PredictionSet{{*arg.direction, all.at(*arg.direction)}};
          }
          return all;
        } else if constexpr (std::is_same_v<T, AgreementQuery>) {
          return thematic_.current_agreement();
        } else if constexpr (std::is_same_v<T, PhaseQuery>) {
          return structure_.current_phase();
        } else if constexpr (std::is_same_v<T, SuccessorQuery>) {
          return classify_successor(arg.referent, speaking_time_);
        } else {
          if (arg.candidates.empty()) throw PreconditionError("reading query without candidates");
          return memory_.disambiguate_reading(config_.inference_track, arg.candidates, arg.window);
        }
      },
      q);
}

json to_json(const PredictionSet& predictions) {
  json out = json::object();
  for (const auto& [dir, preds] : predictions) {
    json list = json::array();
    for (const auto& p : preds) list.push_back({p.act, per_mille(p.probability)});
    out[to_string(dir)] = std::move(list);
  }
  return out;
}

namespace {

json errors_json(const std::vector<StageError>& errors) {
  json out = json::array();
  for (const auto& e : errors) out.push_back({{"stage", e.stage}, {"message", e.message}});
  return out;
}

}  // namespace

json to_json(const UtteranceReport& r) {
  json times = json::array();
  for (const auto& t : r.times) times.push_back(to_json(t));
  json clar = json::array();
  for (const auto& e : r.clarification) clar.push_back({{"event", e.event}, {"detail", e.detail}});
  return {{"turn", r.turn_index},
          {"utterance", r.utterance_index},
          {"speaker", r.speaker},
          {"track", r.track},
          {"act", r.act},
          {"phase", r.phase ? json(to_string(*r.phase)) : json(nullptr)},
          {"times", std::move(times)},
          {"thematic", r.thematic},
          {"agreement", r.agreement.empty() ? json(nullptr) : to_json(r.agreement)},
          {"predictions", to_json(r.predictions)},
          {"clarification", std::move(clar)},
          {"warnings", r.warnings},
          {"errors", errors_json(r.errors)}};
}

json to_json(const TurnReport& r) {
  return {{"turn", r.turn_index},
          {"speaker", r.speaker},
          {"phase", to_string(r.phase)},
          {"phase_repair", r.phase_repair},
          {"leaves", r.subtree ? json(r.subtree->leaves()) : json::array()},
          {"errors", errors_json(r.errors)}};
}

}  // namespace dlgctx
