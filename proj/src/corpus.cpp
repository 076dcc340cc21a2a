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

#include "dlgctx/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "dlgctx/error.hpp"

namespace dlgctx {

using nlohmann::json;

ActInventory::ActInventory(std::vector<ActLabel> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  for (const auto& l : labels_) {
    if (l.empty()) throw ValidationError("act inventory contains an empty label");
  }
}

ActInventory ActInventory::default_inventory() {
  return ActInventory({"greet", "introduce_name", "init_date", "suggest_support_date",
                       "request_comment_date", "uptake", "reject_date", "accept_date",
                       "feedback_acknowledgement", "bye"});
}

bool ActInventory::contains(const ActLabel& act) const {
  return std::binary_search(labels_.begin(), labels_.end(), act);
}

std::optional<std::size_t> ActInventory::index_of(const ActLabel& act) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), act);
  if (it == labels_.end() || *it != act) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t Dialogue::utterance_count() const {
  std::size_t n = 0;
  for (const auto& t : turns) n += t.utterances.size();
  return n;
}

std::size_t Corpus::utterance_count() const {
  std::size_t n = 0;
  for (const auto& d : dialogues) n += d.utterance_count();
  return n;
}

namespace {

std::string where(const std::string& source, const std::string& dialogue, std::size_t turn) {
  return source + ": dialogue '" + dialogue + "' turn " + std::to_string(turn) + ": ";
}

void validate_dialogue(const Dialogue& d, const ActInventory& inventory, const std::string& source) {
  if (d.id.empty()) throw ValidationError(source + ": dialogue with empty id");
  if (d.participants[0].empty() || d.participants[1].empty() ||
      d.participants[0] == d.participants[1]) {
    throw ValidationError(source + ": dialogue '" + d.id + "' must declare two distinct participants");
  }
  if (d.turns.empty()) throw ValidationError(source + ": dialogue '" + d.id + "' has no turns");
  for (std::size_t t = 0; t < d.turns.size(); ++t) {
    const Turn& turn = d.turns[t];
    if (turn.speaker != d.participants[0] && turn.speaker != d.participants[1]) {
      throw ValidationError(where(source, d.id, t) + "speaker '" + turn.speaker +
                            "' is not a declared participant");
    }
    if (turn.utterances.empty()) throw ValidationError(where(source, d.id, t) + "turn has no utterances");
    for (std::size_t u = 0; u < turn.utterances.size(); ++u) {
      const Utterance& utt = turn.utterances[u];
      if (utt.index != u) throw ValidationError(where(source, d.id, t) + "utterance indices not contiguous");
      if (utt.act.empty()) throw ValidationError(where(source, d.id, t) + "empty dialogue act");
      if (!inventory.contains(utt.act)) {
        throw ValidationError(where(source, d.id, t) + "act '" + utt.act +
                              "' is not in the act inventory");
      }
    }
  }
}

Dialogue dialogue_from_json(const json& jd, const std::string& source) {
  Dialogue d;
  if (!jd.is_object()) throw FormatError(source + ": dialogue record must be an object");
  try {
    d.id = jd.at("id").get<std::string>();
  } catch (const json::exception&) {
    throw FormatError(source + ": dialogue record without a string 'id'");
  }
  try {
    d.speaking_time = parse_speaking_time(jd.at("speaking_time").get<std::string>());
    const auto& parts = jd.at("participants");
    if (!parts.is_array() || parts.size() != 2) {
      throw ValidationError(source + ": dialogue '" + d.id + "' must have exactly two participants");
    }
    d.participants = {parts[0].get<std::string>(), parts[1].get<std::string>()};
  } catch (const json::exception& e) {
    throw FormatError(source + ": dialogue '" + d.id + "': " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(source + ": dialogue '" + d.id + "': " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": dialogue '" + d.id + "': " + e.what());
  }
  const json empty_turns = json::array();
  const json& turns = jd.contains("turns") ? jd.at("turns") : empty_turns;
  if (!turns.is_array()) throw FormatError(source + ": dialogue '" + d.id + "': 'turns' must be a list");
  for (std::size_t t = 0; t < turns.size(); ++t) {
    const json& jt = turns[t];
    Turn turn;
    try {
      turn.speaker = jt.at("speaker").get<std::string>();
      turn.language = jt.value("language", std::string());
      const auto& utts = jt.at("utterances");
      if (!utts.is_array()) throw FormatError("'utterances' must be a list");
      for (std::size_t u = 0; u < utts.size(); ++u) {
        const json& ju = utts[u];
        Utterance utt;
        utt.index = u;
        utt.act = ju.at("act").get<std::string>();
        if (ju.contains("text") && !ju.at("text").is_null()) utt.text = ju.at("text").get<std::string>();
        if (ju.contains("times")) {
          if (!ju.at("times").is_array()) throw FormatError("'times' must be a list");
          for (const auto& jx : ju.at("times")) utt.times.push_back(time_expression_from_json(jx));
        }
        turn.utterances.push_back(std::move(utt));
      }
    } catch (const json::exception& e) {
      throw FormatError(where(source, d.id, t) + "malformed record: " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(where(source, d.id, t) + "malformed record: " + e.what());
    }
    d.turns.push_back(std::move(turn));
  }
  return d;
}

}  // namespace

void validate(const Corpus& corpus) {
  for (const auto& d : corpus.dialogues) validate_dialogue(d, corpus.act_inventory, "corpus");
}

Corpus parse_corpus_json(const json& doc, const std::string& source) {
  if (!doc.is_object()) throw FormatError(source + ": corpus must be a JSON object");
  Corpus corpus;
  if (doc.contains("act_inventory")) {
    const auto& inv = doc.at("act_inventory");
    if (!inv.is_array()) throw FormatError(source + ": 'act_inventory' must be a list");
    std::vector<ActLabel> labels;
    for (const auto& a : inv) {
      if (!a.is_string()) throw FormatError(source + ": act inventory entries must be strings");
      labels.push_back(a.get<std::string>());
    }
    corpus.act_inventory = ActInventory(std::move(labels));
  }
  if (doc.contains("dialogues")) {
    const auto& dialogues = doc.at("dialogues");
    if (!dialogues.is_array()) throw FormatError(source + ": 'dialogues' must be a list");
    for (const auto& jd : dialogues) {
      corpus.dialogues.push_back(dialogue_from_json(jd, source));
      validate_dialogue(corpus.dialogues.back(), corpus.act_inventory, source);
    }
  }
  return corpus;
}

Corpus parse_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return parse_corpus_json(doc, path.string());
}

json to_json(const Corpus& corpus) {
  json dialogues = json::array();
  for (const auto& d : corpus.dialogues) {
    json turns = json::array();
    for (const auto& t : d.turns) {
      json utts = json::array();
      for (const auto& u : t.utterances) {
        json ju = {{"act", u.act}};
        if (u.text) ju["text"] = *u.text;
        if (!u.times.empty()) {
          json times = json::array();
          for (const auto& x : u.times) times.push_back(to_json(x));
          ju["times"] = times;
        }
        utts.push_back(ju);
      }
      turns.push_back({{"speaker", t.speaker}, {"language", t.language}, {"utterances", utts}});
    }
    dialogues.push_back({{"id", d.id},
                         {"speaking_time", to_string(d.speaking_time)},
                         {"participants", {d.participants[0], d.participants[1]}},
                         {"turns", turns}});
  }
  return {{"act_inventory", corpus.act_inventory.labels()}, {"dialogues", dialogues}};
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus file " + path.string());
  out << to_json(corpus).dump(1) << "\n";
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double held_out_fraction,
                                       std::uint64_t seed) {
  const std::size_t n = corpus.dialogues.size();
  if (n < 2) throw PreconditionError("split_corpus needs at least 2 dialogues, got " + std::to_string(n));
  if (!(held_out_fraction > 0.0 && held_out_fraction < 1.0)) {
    throw PreconditionError("held-out fraction must lie in (0,1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto held = static_cast<std::size_t>(std::llround(held_out_fraction * static_cast<double>(n)));
  held = std::clamp<std::size_t>(held, 1, n - 1);
  std::vector<bool> is_held(n, false);
  for (std::size_t i = 0; i < held; ++i) is_held[order[i]] = true;

  Corpus train, rest;
  train.act_inventory = rest.act_inventory = corpus.act_inventory;
  // Original order is kept inside each part.
  for (std::size_t i = 0; i < n; ++i) {
    (is_held[i] ? rest : train).dialogues.push_back(corpus.dialogues[i]);
  }
  return {std::move(train), std::move(rest)};
}

}  // namespace dlgctx
