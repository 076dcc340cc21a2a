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

#include "dlgctx/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "dlgctx/error.hpp"

namespace dlgctx {

using nlohmann::json;

namespace {
constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "dlgctx-ngram";
}  // namespace

std::string to_string(DirectionTag tag) {
  switch (tag) {
    case DirectionTag::same_speaker: return "same_speaker";
    case DirectionTag::speaker_change: return "speaker_change";
    case DirectionTag::dialogue_start: return "dialogue_start";
  }
  return "?";
}

DirectionTag parse_direction(const std::string& name) {
  if (name == "same_speaker") return DirectionTag::same_speaker;
  if (name == "speaker_change") return DirectionTag::speaker_change;
  if (name == "dialogue_start") return DirectionTag::dialogue_start;
  throw FormatError("unknown direction tag '" + name + "'");
}

DirectionTag direction_between(const ParticipantId& from, const ParticipantId& to) {
  return from == to ? DirectionTag::same_speaker : DirectionTag::speaker_change;
}

int per_mille(double probability) { return static_cast<int>(std::lround(probability * 1000.0)); }

std::vector<ActEvent> flatten(const Dialogue& dialogue) {
  std::vector<ActEvent> events;
  for (const auto& turn : dialogue.turns) {
    for (const auto& u : turn.utterances) events.push_back({u.act, turn.speaker});
  }
  return events;
}

History history_before(const std::vector<ActEvent>& events, std::size_t pos, std::size_t max_items) {
  History h;
  const std::size_t begin = pos > max_items ? pos - max_items : 0;
  h.reserve(pos - begin);
  for (std::size_t i = begin; i < pos; ++i) {
    h.push_back({events[i].act, direction_between(events[i].speaker, events[i + 1].speaker)});
  }
  return h;
}

NGramModel::NGramModel(ActInventory inventory, int max_order)
    : inventory_(std::move(inventory)), max_order_(max_order), lambdas_(fallback_lambdas(max_order)) {}

std::vector<double> NGramModel::fallback_lambdas(int max_order) {
  if (max_order < 1) throw PreconditionError("max_order must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(max_order));
  double sum = 0.0;
  for (int i = 0; i < max_order; ++i) {
    w[static_cast<std::size_t>(i)] = (i + 1) * (i + 2) / 2.0;
    sum += w[static_cast<std::size_t>(i)];
  }
  for (double& x : w) x /= sum;
  return w;
}

void NGramModel::set_lambdas(std::vector<double> lambdas) {
  if (lambdas.size() != static_cast<std::size_t>(max_order_)) {
    throw ValidationError("expected " + std::to_string(max_order_) + " interpolation weights, got " +
                          std::to_string(lambdas.size()));
  }
  double sum = 0.0;
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw ValidationError("interpolation weights must be non-negative");
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("interpolation weights must sum to 1");
  lambdas_ = std::move(lambdas);
}

NGramModel::Token NGramModel::token(const HistoryItem& item) const {
  auto idx = inventory_.index_of(item.act);
  if (!idx) throw ValidationError("act '" + item.act + "' is not in the model inventory");
  if (item.direction == DirectionTag::dialogue_start) {
    throw PreconditionError("dialogue_start cannot tag a history transition");
  }
  return static_cast<Token>(*idx * 2 + (item.direction == DirectionTag::same_speaker ? 0 : 1));
}

NGramModel::Key NGramModel::key_of(const History& history, std::size_t begin, std::size_t end) const {
  Key key;
  key.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) key.push_back(token(history[i]));
  return key;
}

void NGramModel::validate_history(const History& history) const {
  for (const auto& item : history) (void)token(item);
}

void NGramModel::add(const Key& key, std::size_t act) {
  auto& cc = counts_[key];
  if (cc.per_act.empty()) cc.per_act.assign(inventory_.size(), 0);
  ++cc.per_act[act];
  ++cc.total;
}

void NGramModel::observe(const History& history, const ActLabel& act) {
  auto idx = inventory_.index_of(act);
  if (!idx) throw ValidationError("act '" + act + "' is not in the model inventory");
  validate_history(history);
  for (int order = 1; order <= max_order_; ++order) {
    const auto len = static_cast<std::size_t>(order - 1);
    if (len > history.size()) break;
    add(key_of(history, history.size() - len, history.size()), *idx);
  }
}

void NGramModel::count_dialogue(const Dialogue& dialogue) {
  const auto events = flatten(dialogue);
  // tokens[i] tags act i with the direction towards act i + 1.
  std::vector<Token> tokens;
  std::vector<std::size_t> acts;
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto idx = inventory_.index_of(events[i].act);
    if (!idx) throw ValidationError("act '" + events[i].act + "' is not in the model inventory");
    acts.push_back(*idx);
    if (i + 1 < events.size()) {
      tokens.push_back(static_cast<Token>(
          *idx * 2 + (events[i].speaker == events[i + 1].speaker ? 0 : 1)));
    }
  }
  for (std::size_t j = 0; j < acts.size(); ++j) {
    for (int order = 1; order <= max_order_; ++order) {
      const auto len = static_cast<std::size_t>(order - 1);
      if (len > j) break;
      add(Key(tokens.begin() + static_cast<std::ptrdiff_t>(j - len),
              tokens.begin() + static_cast<std::ptrdiff_t>(j)),
          acts[j]);
    }
  }
}

std::vector<std::optional<double>> NGramModel::order_frequencies(const History& history,
                                                                 std::size_t act) const {
  std::vector<std::optional<double>> f(static_cast<std::size_t>(max_order_));
  const double vocab = static_cast<double>(inventory_.size());
  auto uni = counts_.find(Key{});
  const double n = uni == counts_.end() ? 0.0 : static_cast<double>(uni->second.total);
  const double c = uni == counts_.end() ? 0.0 : static_cast<double>(uni->second.per_act[act]);
  f[0] = (c + 1.0) / (n + vocab);
  for (int order = 2; order <= max_order_; ++order) {
    const auto len = static_cast<std::size_t>(order - 1);
    if (len > history.size()) break;
    auto it = counts_.find(key_of(history, history.size() - len, history.size()));
    if (it == counts_.end() || it->second.total == 0) continue;
    f[static_cast<std::size_t>(order - 1)] =
        static_cast<double>(it->second.per_act[act]) / static_cast<double>(it->second.total);
  }
  return f;
}

void NGramModel::distribution_into(const History& history, std::vector<double>& out) const {
  const std::size_t vocab = inventory_.size();
  out.assign(vocab, 0.0);
  auto uni = counts_.find(Key{});
  const double n = uni == counts_.end() ? 0.0 : static_cast<double>(uni->second.total);
  std::vector<double> unigram(vocab);
  for (std::size_t a = 0; a < vocab; ++a) {
    const double c = uni == counts_.end() ? 0.0 : static_cast<double>(uni->second.per_act[a]);
    unigram[a] = (c + 1.0) / (n + static_cast<double>(vocab));
  }
  double mass = lambdas_[0];
  for (std::size_t a = 0; a < vocab; ++a) out[a] = lambdas_[0] * unigram[a];
  for (int order = 2; order <= max_order_; ++order) {
    const auto len = static_cast<std::size_t>(order - 1);
    if (len > history.size()) break;
    auto it = counts_.find(key_of(history, history.size() - len, history.size()));
    if (it == counts_.end() || it->second.total == 0) continue;
    const double lambda = lambdas_[static_cast<std::size_t>(order - 1)];
    const double total = static_cast<double>(it->second.total);
    mass += lambda;
    for (std::size_t a = 0; a < vocab; ++a) {
      out[a] += lambda * static_cast<double>(it->second.per_act[a]) / total;
    }
  }
  // Orders without usable context give their weight back to the others.
  if (mass <= 0.0) {
    out = unigram;
    return;
  }
  for (double& p : out) p /= mass;
}

std::vector<double> NGramModel::distribution(const History& history) const {
  validate_history(history);
  std::vector<double> out;
  distribution_into(history, out);
  return out;
}

double NGramModel::probability(const History& history, const ActLabel& act) const {
  auto idx = inventory_.index_of(act);
  if (!idx) throw ValidationError("act '" + act + "' is not in the model inventory");
  return distribution(history)[*idx];
}

std::vector<Prediction> NGramModel::predict(const History& history, std::size_t k) const {
  if (k < 1) throw PreconditionError("predict needs k >= 1");
  const auto dist = distribution(history);
  std::vector<std::size_t> order(dist.size());
  std::iota(order.begin(), order.end(), 0);
  // Labels are sorted, so index order is name order for ties.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
  order.resize(std::min(k, order.size()));
  std::vector<Prediction> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back({inventory_.at(i), dist[i]});
  return out;
}

std::size_t NGramModel::count(const History& context, const ActLabel& act) const {
  auto idx = inventory_.index_of(act);
  if (!idx) throw ValidationError("act '" + act + "' is not in the model inventory");
  auto it = counts_.find(key_of(context, 0, context.size()));
  return it == counts_.end() ? 0 : it->second.per_act[*idx];
}

std::size_t NGramModel::context_total(const History& context) const {
  auto it = counts_.find(key_of(context, 0, context.size()));
  return it == counts_.end() ? 0 : it->second.total;
}

NGramModel NGramModel::train(const Corpus& corpus, const TrainOptions& options) {
  if (options.max_order < 1) throw PreconditionError("max_order must be >= 1");
  if (corpus.utterance_count() == 0) throw PreconditionError("cannot train on an empty corpus");
  if (corpus.act_inventory.empty()) throw ValidationError("corpus has an empty act inventory");

  NGramModel model(corpus.act_inventory, options.max_order);
  for (const auto& d : corpus.dialogues) model.count_dialogue(d);

  if (options.lambdas) {
    model.set_lambdas(*options.lambdas);
    return model;
  }
  if (corpus.dialogues.size() < 2 || options.max_order == 1) return model;

  // Deleted interpolation: each held-out event credits the order(s) whose
  // relative frequency predicts it best.
  auto [train_part, held_out] = split_corpus(corpus, options.held_out_fraction, options.seed);
  NGramModel probe(corpus.act_inventory, options.max_order);
  for (const auto& d : train_part.dialogues) probe.count_dialogue(d);

  std::vector<double> weight(static_cast<std::size_t>(options.max_order), 0.0);
  std::size_t events = 0;
  for (const auto& d : held_out.dialogues) {
    const auto ev = flatten(d);
    for (std::size_t j = 0; j < ev.size(); ++j) {
      const auto h = history_before(ev, j, static_cast<std::size_t>(options.max_order - 1));
      const auto f = probe.order_frequencies(h, *probe.inventory_.index_of(ev[j].act));
      double best = -1.0;
      for (const auto& x : f) {
        if (x && *x > best) best = *x;
      }
      std::size_t ties = 0;
      for (const auto& x : f) ties += (x && *x == best) ? 1 : 0;
      for (std::size_t o = 0; o < f.size(); ++o) {
        if (f[o] && *f[o] == best) weight[o] += 1.0 / static_cast<double>(ties);
      }
      ++events;
    }
  }
  model.held_out_events_ = events;
  if (events < options.min_held_out_events) return model;

  const double sum = std::accumulate(weight.begin(), weight.end(), 0.0);
  for (double& w : weight) w /= sum;
  model.lambdas_ = std::move(weight);
  model.lambdas_estimated_ = true;
  return model;
}

json NGramModel::to_json() const {
  json counts = json::array();
  for (const auto& [key, cc] : counts_) {
    json history = json::array();
    for (Token t : key) {
      history.push_back({inventory_.at(t / 2),
                         to_string(t % 2 == 0 ? DirectionTag::same_speaker : DirectionTag::speaker_change)});
    }
    for (std::size_t a = 0; a < cc.per_act.size(); ++a) {
      if (cc.per_act[a] == 0) continue;
      counts.push_back({{"history", history}, {"act", inventory_.at(a)}, {"count", cc.per_act[a]}});
    }
  }
  return {{"format", kFormatName},
          {"version", kFormatVersion},
          {"max_order", max_order_},
          {"lambdas", lambdas_},
          {"lambdas_estimated", lambdas_estimated_},
          {"held_out_events", held_out_events_},
          {"inventory", inventory_.labels()},
          {"counts", counts}};
}

NGramModel NGramModel::from_json(const json& j) {
  try {
    if (j.value("format", std::string()) != kFormatName) throw FormatError("not a dlgctx n-gram model");
    if (j.at("version").get<int>() != kFormatVersion) {
      throw FormatError("unsupported model version " + j.at("version").dump());
    }
    NGramModel model(ActInventory(j.at("inventory").get<std::vector<std::string>>()),
                     j.at("max_order").get<int>());
    if (model.max_order_ < 1) throw ValidationError("max_order must be >= 1");
    model.set_lambdas(j.at("lambdas").get<std::vector<double>>());
    model.lambdas_estimated_ = j.value("lambdas_estimated", false);
    model.held_out_events_ = j.value("held_out_events", std::size_t{0});
    for (const auto& entry : j.at("counts")) {
      History h;
      for (const auto& item : entry.at("history")) {
        h.push_back({item.at(0).get<std::string>(), parse_direction(item.at(1).get<std::string>())});
      }
      if (h.size() >= static_cast<std::size_t>(model.max_order_)) {
        throw ValidationError("count history longer than max_order - 1");
      }
      auto act = model.inventory_.index_of(entry.at("act").get<std::string>());
      if (!act) throw ValidationError("counted act outside the inventory");
      const auto n = entry.at("count").get<std::size_t>();
      auto& cc = model.counts_[model.key_of(h, 0, h.size())];
      if (cc.per_act.empty()) cc.per_act.assign(model.inventory_.size(), 0);
      cc.per_act[*act] += n;
      cc.total += n;
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  }
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file " + path.string());
  out << to_json().dump(1) << "\n";
}

namespace {

void check_corpus_acts(const NGramModel& model, const Corpus& corpus) {
  if (corpus.utterance_count() == 0) throw PreconditionError("cannot evaluate on an empty corpus");
  for (const auto& d : corpus.dialogues) {
    for (const auto& t : d.turns) {
      for (const auto& u : t.utterances) {
        if (!model.inventory().contains(u.act)) {
          throw ValidationError("dialogue '" + d.id + "' uses act '" + u.act +
                                "' unknown to the model");
        }
      }
    }
  }
}

}  // namespace

double evaluate_topn(const NGramModel& model, const Corpus& corpus, std::size_t n) {
  if (n < 1) throw PreconditionError("top-n needs n >= 1");
  check_corpus_acts(model, corpus);
  const auto context = static_cast<std::size_t>(model.max_order() - 1);
  const auto& dialogues = corpus.dialogues;
  const auto count = static_cast<long>(dialogues.size());
  std::size_t hits = 0;
  std::size_t total = 0;

#pragma omp parallel for schedule(dynamic) reduction(+ : hits, total)
  for (long i = 0; i < count; ++i) {
    const auto events = flatten(dialogues[static_cast<std::size_t>(i)]);
    for (std::size_t j = 0; j < events.size(); ++j) {
      const auto dist = model.distribution(history_before(events, j, context));
      const std::size_t truth = *model.inventory().index_of(events[j].act);
      // Rank under the same ordering as predict(): probability, then name.
      std::size_t rank = 0;
      for (std::size_t a = 0; a < dist.size(); ++a) {
        if (dist[a] > dist[truth] || (dist[a] == dist[truth] && a < truth)) ++rank;
      }
      hits += rank < n ? 1 : 0;
      ++total;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

double evaluate_topn_serial(const NGramModel& model, const Corpus& corpus, std::size_t n) {
  if (n < 1) throw PreconditionError("top-n needs n >= 1");
  check_corpus_acts(model, corpus);
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const auto& d : corpus.dialogues) {
    const auto events = flatten(d);
    for (std::size_t j = 0; j < events.size(); ++j) {
      const auto top = model.predict(history_before(events, j), n);
      hits += std::any_of(top.begin(), top.end(),
                          [&](const Prediction& p) { return p.act == events[j].act; })
                  ? 1
                  : 0;
      ++total;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<GapFiller> estimate_gap(const NGramModel& model, const History& left, const History& right,
                                    int gap_length, DirectionTag within_gap) {
  if (gap_length < 1 || gap_length > 3) {
    throw PreconditionError("gap length must be 1..3, got " + std::to_string(gap_length));
  }
  const auto& labels = model.inventory().labels();
  const std::size_t vocab = labels.size();
  std::vector<std::size_t> digits(static_cast<std::size_t>(gap_length), 0);
  std::vector<GapFiller> out;
  for (;;) {
    GapFiller filler;
    History h = left;
    double score = 1.0;
    for (std::size_t d : digits) {
      score *= model.probability(h, labels[d]);
      h.push_back({labels[d], within_gap});
      filler.acts.push_back(labels[d]);
    }
    if (!right.empty()) score *= model.probability(h, right.front().act);
    filler.score = score;
    out.push_back(std::move(filler));

    std::size_t pos = digits.size();
    while (pos > 0 && ++digits[pos - 1] == vocab) digits[--pos] = 0;
    if (pos == 0) break;
  }
  std::stable_sort(out.begin(), out.end(), [](const GapFiller& a, const GapFiller& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.acts < b.acts;
  });
  return out;
}

}  // namespace dlgctx
