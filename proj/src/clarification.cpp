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

#include "dlgctx/clarification.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <utility>

#include "dlgctx/calendar.hpp"
#include "dlgctx/error.hpp"
#include "dlgctx/thematic.hpp"

namespace dlgctx {

using nlohmann::json;

namespace {

// Splits UTF-8 into code points; malformed bytes count as one unit each.
std::vector<char32_t> code_points(const std::string& s) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0) len = 4;
    if (i + len > s.size()) len = 1;
    char32_t cp = len == 1 ? c : c & (0xFF >> (len + 1));
    for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

}  // namespace

double normalized_similarity(const std::string& a, const std::string& b) {
  const auto x = code_points(a);
  const auto y = code_points(b);
  const std::size_t longest = std::max(x.size(), y.size());
  if (longest == 0) return 1.0;
  std::vector<std::size_t> row(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (x[i - 1] == y[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return 1.0 - static_cast<double>(row[y.size()]) / static_cast<double>(longest);
}

void validate(const Lexicon& lexicon) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : lexicon) {
    if (p.a == p.b) throw ValidationError("confusable pair '" + p.a + "' pairs a token with itself");
    if (!(p.similarity > 0.0 && p.similarity <= 1.0)) {
      throw ValidationError("confusable pair (" + p.a + ", " + p.b + ") has similarity outside (0,1]");
    }
    auto key = std::minmax(p.a, p.b);
    if (!seen.emplace(key.first, key.second).second) {
      throw ValidationError("confusable pair (" + p.a + ", " + p.b + ") listed twice");
    }
  }
}

Lexicon lexicon_from_json(const json& j) {
  if (!j.is_array()) throw FormatError("lexicon must be a JSON list");
  Lexicon out;
  try {
    for (const auto& e : j) {
      ConfusablePair p{e.at("a").get<std::string>(), e.at("b").get<std::string>(), 0.0};
      p.similarity = e.contains("similarity") && !e.at("similarity").is_null()
                         ? e.at("similarity").get<double>()
                         : normalized_similarity(p.a, p.b);
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed lexicon entry: ") + e.what());
  }
  validate(out);
  return out;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  try {
    return lexicon_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<ConfusableFlag> detect_confusables(const std::vector<std::string>& tokens,
                                               const Lexicon& lexicon, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw PreconditionError("threshold must lie in (0,1]");
  std::vector<ConfusableFlag> flags;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& p : lexicon) {
      if (p.similarity >= threshold && (tokens[i] == p.a || tokens[i] == p.b)) {
        flags.push_back({i, p});
        break;
      }
    }
  }
  return flags;
}

std::string describe(const Trigger& trigger) {
  if (const auto* d = std::get_if<ImplausibleDate>(&trigger)) return "implausible date: " + d->reason;
  const auto& c = std::get<ConfusableTokens>(trigger);
  return "confusable token at " + std::to_string(c.position) + ": " + c.pair.a + "/" + c.pair.b;
}

std::string describe(const Proposal& proposal) {
  if (const auto* d = std::get_if<TimeDescription>(&proposal)) return to_display(*d);
  return std::get<std::string>(proposal);
}

std::optional<TimeDescription> correct_date(const TimeDescription& desc, int reference_year) {
  if (check_plausibility(desc, reference_year).plausible) {
    throw PreconditionError("description is already plausible");
  }
  const int year = desc.year.value_or(reference_year);
  const bool month_ok = desc.month && *desc.month >= 1 && *desc.month <= 12;
  std::vector<TimeDescription> edits;

  if (desc.day && month_ok && !(desc.from_to && desc.from_to->level == Level::day)) {
    const int last = calendar::days_in_month(year, *desc.month);
    if (*desc.day > last) {
      TimeDescription e = desc;
      e.day = last;
      edits.push_back(e);
    }
  }
  if (desc.day_of_week) {
    TimeDescription e = desc;
    e.day_of_week.reset();
    edits.push_back(e);
  }
  if (desc.week && !(desc.from_to && desc.from_to->level == Level::week)) {
    TimeDescription e = desc;
    e.week = std::clamp(*desc.week, 1, calendar::weeks_in_iso_year(year));
    if (e.week != desc.week) edits.push_back(e);
  }
  if (desc.from_to) {
    int top = 0;
    if (desc.from_to->level == Level::day && month_ok) top = calendar::days_in_month(year, *desc.month);
    if (desc.from_to->level == Level::week) top = calendar::weeks_in_iso_year(year);
    if (desc.from_to->level == Level::month) top = 12;
    if (top > 0) {
      TimeDescription e = desc;
      e.from_to->lo = std::clamp(desc.from_to->lo, 1, top);
      e.from_to->hi = std::clamp(desc.from_to->hi, 1, top);
      if (e.from_to != desc.from_to) edits.push_back(e);
    }
  }
  for (const auto& e : edits) {
    if (check_plausibility(e, reference_year).plausible) return e;
  }
  return std::nullopt;
}

std::string clarification_prompt(const Proposal& proposal) {
  return "CLARIFY: did you mean " + describe(proposal) + "? [y/n]";
}

std::string to_string(Response response) { return response == Response::accept ? "accept" : "reject"; }

std::string ClarificationFSA::state_name() const {
  switch (state_.index()) {
    case 0: return "Idle";
    case 1: return "AwaitingConfirmation";
    case 2: return "Resolved";
    default: return "RepeatRequested";
  }
}

void ClarificationFSA::activate(Pending p) {
  if (p.proposal) {
    state_ = AwaitingConfirmation{std::move(p.trigger), std::move(*p.proposal)};
  } else {
    state_ = RepeatRequested{std::move(p.trigger)};
  }
}

const ClarificationFSA::State& ClarificationFSA::propose_correction(const TimeDescription& desc,
                                                                    int reference_year) {
  const auto verdict = check_plausibility(desc, reference_year);
  if (verdict.plausible) throw PreconditionError("description is already plausible");
  Pending p{ImplausibleDate{desc, verdict.reason}, std::nullopt};
  if (auto fixed = correct_date(desc, reference_year)) p.proposal = Proposal{*fixed};
  if (idle()) {
    activate(std::move(p));
  } else {
    queue_.push_back(std::move(p));
  }
  return state_;
}

const ClarificationFSA::State& ClarificationFSA::raise_confusable(const ConfusableFlag& flag,
                                                                  const std::string& token) {
  if (token != flag.pair.a && token != flag.pair.b) {
    throw PreconditionError("token '" + token + "' is not a member of the flagged pair");
  }
  Pending p{ConfusableTokens{flag.position, flag.pair}, Proposal{token == flag.pair.a ? flag.pair.b : flag.pair.a}};
  if (idle()) {
    activate(std::move(p));
  } else {
    queue_.push_back(std::move(p));
  }
  return state_;
}

const ClarificationFSA::State& ClarificationFSA::step(Response response) {
  auto* waiting = std::get_if<AwaitingConfirmation>(&state_);
  if (!waiting) throw PreconditionError("no clarification is awaiting confirmation (state " + state_name() + ")");
  if (response == Response::accept) {
    state_ = Resolved{std::move(waiting->proposal)};
  } else {
    state_ = RepeatRequested{std::move(waiting->trigger)};
  }
  return state_;
}

void ClarificationFSA::reset() { state_ = Idle{}; }

bool ClarificationFSA::start_next() {
  if (!idle()) throw PreconditionError("start_next requires the Idle state");
  if (queue_.empty()) return false;
  Pending p = std::move(queue_.front());
  queue_.pop_front();
  activate(std::move(p));
  return true;
}

json to_json(const Trigger& trigger) {
  if (const auto* d = std::get_if<ImplausibleDate>(&trigger)) {
    return {{"kind", "implausible_date"}, {"desc", to_json(d->desc)}, {"reason", d->reason}};
  }
  const auto& c = std::get<ConfusableTokens>(trigger);
  return {{"kind", "confusable_tokens"},
          {"position", c.position},
          {"pair", {c.pair.a, c.pair.b}},
          {"similarity", c.pair.similarity}};
}

json to_json(const Proposal& proposal) {
  if (const auto* d = std::get_if<TimeDescription>(&proposal)) return to_json(*d);
  return std::get<std::string>(proposal);
}

}  // namespace dlgctx
