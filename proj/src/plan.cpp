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

#include "dlgctx/plan.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "dlgctx/error.hpp"

namespace dlgctx {

using nlohmann::json;

std::string to_string(OperatorLevel level) {
  switch (level) {
    case OperatorLevel::turn: return "turn";
    case OperatorLevel::phase: return "phase";
    case OperatorLevel::dialogue: return "dialogue";
  }
  return "?";
}

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::hand_coded: return "hand_coded";
    case OperatorKind::learned: return "learned";
    case OperatorKind::repair: return "repair";
  }
  return "?";
}

namespace {

OperatorLevel parse_operator_level(const std::string& s) {
  if (s == "turn") return OperatorLevel::turn;
  if (s == "phase") return OperatorLevel::phase;
  if (s == "dialogue") return OperatorLevel::dialogue;
  throw FormatError("unknown operator level '" + s + "'");
}

OperatorKind parse_operator_kind(const std::string& s) {
  if (s == "hand_coded") return OperatorKind::hand_coded;
  if (s == "learned") return OperatorKind::learned;
  if (s == "repair") return OperatorKind::repair;
  throw FormatError("unknown operator kind '" + s + "'");
}

}  // namespace

void validate_operators(const OperatorSet& ops, const ActInventory* inventory) {
  std::map<std::string, OperatorLevel> levels;
  for (const auto& op : ops) {
    if (op.name.empty()) throw ValidationError("operator without a name");
    if (op.body.empty()) throw ValidationError("operator '" + op.name + "' has an empty body");
    levels.emplace(op.name, op.level);
  }
  for (const auto& op : ops) {
    for (const auto& sym : op.body) {
      if (op.level == OperatorLevel::turn) {
        if (inventory && !inventory->contains(sym)) {
          throw ValidationError("operator '" + op.name + "' uses act '" + sym + "' outside the inventory");
        }
        continue;
      }
      auto it = levels.find(sym);
      if (it == levels.end() || it->second >= op.level) {
        throw ValidationError("operator '" + op.name + "' body symbol '" + sym +
                              "' is not an operator of a lower level");
      }
    }
  }
}

OperatorSet operators_from_json(const json& j) {
  if (!j.is_array()) throw FormatError("operator file must hold a JSON list");
  OperatorSet ops;
  try {
    for (const auto& jo : j) {
      PlanOperator op;
      op.name = jo.at("name").get<std::string>();
      op.level = parse_operator_level(jo.value("level", std::string("turn")));
      op.body = jo.at("body").get<std::vector<std::string>>();
      if (jo.contains("phase") && !jo.at("phase").is_null()) op.phase = parse_phase(jo.at("phase").get<std::string>());
      op.kind = parse_operator_kind(jo.value("kind", std::string("hand_coded")));
      op.support = jo.value("support", std::size_t{0});
      ops.push_back(std::move(op));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed operator record: ") + e.what());
  }
  validate_operators(ops);
  return ops;
}

json to_json(const OperatorSet& ops) {
  json out = json::array();
  for (const auto& op : ops) {
    json jo = {{"name", op.name},
               {"level", to_string(op.level)},
               {"body", op.body},
               {"phase", op.phase ? json(to_string(*op.phase)) : json(nullptr)},
               {"kind", to_string(op.kind)}};
    if (op.kind == OperatorKind::learned) jo["support"] = op.support;
    out.push_back(std::move(jo));
  }
  return out;
}

OperatorSet load_operators(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open operator file " + path.string());
  try {
    return operators_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_operators(const OperatorSet& ops, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write operator file " + path.string());
  out << to_json(ops).dump(1) << "\n";
}

DialoguePhase fallback_phase(const ActLabel& act) {
  if (act == "greet" || act == "introduce_name") return DialoguePhase::opening;
  if (act == "bye") return DialoguePhase::closing;
  return DialoguePhase::negotiation;
}

std::vector<ActLabel> PlanNode::leaves() const {
  std::vector<ActLabel> out;
  std::function<void(const PlanNode&)> walk = [&](const PlanNode& n) {
    if (n.kind == PlanNodeKind::act) {
      out.push_back(n.label);
      return;
    }
    for (const auto& c : n.children) walk(c);
  };
  walk(*this);
  return out;
}

std::size_t PlanNode::leaf_count() const {
  if (kind == PlanNodeKind::act) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.leaf_count();
  return n;
}

namespace {

PlanNode leaf(const ActLabel& act) { return {PlanNodeKind::act, act, std::nullopt, {}, std::nullopt}; }

// True when `a` should win over `b` for the same match length.
bool preferred(const PlanOperator& a, const PlanOperator& b) {
  if (a.support != b.support) return a.support > b.support;
  if (a.kind != b.kind) return a.kind == OperatorKind::hand_coded;
  return a.name < b.name;
}

}  // namespace

PlanNode recognize_turn(std::span<const ActLabel> acts, const OperatorSet& ops) {
  if (acts.empty()) throw PreconditionError("cannot recognize an empty turn");
  PlanNode turn{PlanNodeKind::turn, "turn", std::nullopt, {}, std::nullopt};
  PlanNode pending{PlanNodeKind::repair, "uncovered", std::nullopt, {}, std::nullopt};
  auto flush = [&] {
    if (pending.children.empty()) return;
    turn.children.push_back(std::move(pending));
    pending = PlanNode{PlanNodeKind::repair, "uncovered", std::nullopt, {}, std::nullopt};
  };

  std::size_t pos = 0;
  while (pos < acts.size()) {
    const PlanOperator* best = nullptr;
    for (const auto& op : ops) {
      if (op.level != OperatorLevel::turn || op.kind == OperatorKind::repair) continue;
      const std::size_t len = op.body.size();
      if (pos + len > acts.size() || !std::equal(op.body.begin(), op.body.end(), acts.begin() + pos)) continue;
      if (!best || len > best->body.size() || (len == best->body.size() && preferred(op, *best))) best = &op;
    }
    if (!best) {
      pending.children.push_back(leaf(acts[pos]));
      ++pos;
      continue;
    }
    flush();
    PlanNode node{PlanNodeKind::op, best->name, best->phase, {}, std::nullopt};
    for (const auto& a : best->body) node.children.push_back(leaf(a));
    turn.children.push_back(std::move(node));
    pos += best->body.size();
  }
  flush();
  return turn;
}

DialoguePhase determine_phase(const PlanNode& turn, DialoguePhase current) {
  std::array<std::size_t, 3> votes{};
  std::function<void(const PlanNode&)> vote = [&](const PlanNode& n) {
    if (n.kind == PlanNodeKind::act) {
      ++votes[static_cast<std::size_t>(fallback_phase(n.label))];
    } else if (n.kind == PlanNodeKind::op && n.phase) {
      votes[static_cast<std::size_t>(*n.phase)] += n.leaf_count();
    } else {
      for (const auto& c : n.children) vote(c);
    }
  };
  vote(turn);
  const std::size_t top = *std::max_element(votes.begin(), votes.end());
  const auto cur = static_cast<std::size_t>(current);
  if (votes[cur] == top) return current;
  for (std::size_t p = cur + 1; p < votes.size(); ++p) {
    if (votes[p] == top) return static_cast<DialoguePhase>(p);
  }
  for (std::size_t p = cur; p-- > 0;) {
    if (votes[p] == top) return static_cast<DialoguePhase>(p);
  }
  return current;
}

std::vector<DialoguePhase> leaf_phases(const PlanNode& turn) {
  std::vector<DialoguePhase> out;
  std::function<void(const PlanNode&, std::optional<DialoguePhase>)> walk =
      [&](const PlanNode& n, std::optional<DialoguePhase> inherited) {
        if (n.kind == PlanNodeKind::act) {
          out.push_back(inherited.value_or(fallback_phase(n.label)));
          return;
        }
        const auto tag = n.kind == PlanNodeKind::op && n.phase ? n.phase : inherited;
        for (const auto& c : n.children) walk(c, tag);
      };
  walk(turn, std::nullopt);
  return out;
}

AttachResult IntentionalStructure::attach_turn(PlanNode turn) {
  const DialoguePhase phase = determine_phase(turn, current_);
  auto last_phase_node = [this]() -> PlanNode* {
    for (auto it = root_.children.rbegin(); it != root_.children.rend(); ++it) {
      if (it->kind == PlanNodeKind::phase) return &*it;
    }
    return nullptr;
  };
  PlanNode* open = last_phase_node();
  if (open && phase < current_) {
    PlanNode& last = root_.children.back();
    if (last.kind == PlanNodeKind::repair && last.phase == phase) {
      last.children.push_back(std::move(turn));
    } else {
      root_.children.push_back({PlanNodeKind::repair, "phase-regression", phase, {}, std::nullopt});
      root_.children.back().children.push_back(std::move(turn));
    }
    return {phase, true};
  }
  if (open && phase == current_) {
    open->children.push_back(std::move(turn));
  } else {
    root_.children.push_back({PlanNodeKind::phase, to_string(phase), phase, {}, std::nullopt});
    root_.children.back().children.push_back(std::move(turn));
  }
  current_ = phase;
  return {phase, false};
}

std::size_t IntentionalStructure::phase_repair_count() const {
  return static_cast<std::size_t>(std::count_if(root_.children.begin(), root_.children.end(),
                                                [](const PlanNode& n) { return n.kind == PlanNodeKind::repair; }));
}

std::string IntentionalStructure::dump() const {
  std::ostringstream out;
  std::function<void(const PlanNode&, int)> walk = [&](const PlanNode& n, int depth) {
    out << std::string(static_cast<std::size_t>(depth) * 2, ' ');
    switch (n.kind) {
      case PlanNodeKind::act: out << "act:" << n.label; break;
      case PlanNodeKind::repair: out << "repair:" << n.label; break;
      case PlanNodeKind::phase: out << "phase:" << n.label; break;
      default: out << n.label;
    }
    if (n.phase && n.kind != PlanNodeKind::phase) out << " [" << to_string(*n.phase) << "]";
    if (n.note) out << " (" << *n.note << ")";
    out << '\n';
    for (const auto& c : n.children) walk(c, depth + 1);
  };
  walk(root_, 0);
  return out.str();
}

namespace {

std::string operator_name(const std::vector<ActLabel>& body) {
  std::string name;
  for (const auto& act : body) {
    if (!name.empty()) name += '-';
    for (char c : act) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return name;
}

DialoguePhase majority_phase(const std::vector<ActLabel>& body) {
  std::array<std::size_t, 3> votes{};
  for (const auto& a : body) ++votes[static_cast<std::size_t>(fallback_phase(a))];
  const std::size_t top = *std::max_element(votes.begin(), votes.end());
  const DialoguePhase first = fallback_phase(body.front());
  if (votes[static_cast<std::size_t>(first)] == top) return first;
  return static_cast<DialoguePhase>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

}  // namespace

OperatorSet learn_operators(const Corpus& corpus, std::size_t min_support) {
  if (min_support < 1) throw PreconditionError("min_support must be >= 1");
  if (corpus.dialogues.empty()) throw PreconditionError("cannot learn operators from an empty corpus");

  std::map<std::vector<ActLabel>, std::size_t> whole;
  std::vector<std::vector<ActLabel>> turns;
  for (const auto& d : corpus.dialogues) {
    for (const auto& t : d.turns) {
      std::vector<ActLabel> acts;
      for (const auto& u : t.utterances) acts.push_back(u.act);
      ++whole[acts];
      turns.push_back(std::move(acts));
    }
  }

  std::map<std::vector<ActLabel>, std::size_t> support;
  for (const auto& [pattern, n] : whole) {
    if (n >= min_support) support[pattern] += n;
  }
  for (const auto& acts : turns) {
    if (whole[acts] >= min_support) continue;
    std::set<std::vector<ActLabel>> parts;
    for (std::size_t b = 1; b < acts.size(); ++b) {
      if (fallback_phase(acts[b - 1]) == fallback_phase(acts[b])) continue;
      parts.emplace(acts.begin(), acts.begin() + static_cast<std::ptrdiff_t>(b));
      parts.emplace(acts.begin() + static_cast<std::ptrdiff_t>(b), acts.end());
    }
    for (const auto& p : parts) ++support[p];
  }
  // A part that is also a frequent whole turn already carries its whole-turn
  // count; a part that is a rare whole turn adds those turns too.
  OperatorSet ops;
  for (const auto& [pattern, n] : support) {
    std::size_t total = n;
    auto w = whole.find(pattern);
    if (w != whole.end() && w->second < min_support) total += w->second;
    if (total < min_support) continue;
    ops.push_back({operator_name(pattern), OperatorLevel::turn, pattern, majority_phase(pattern),
                   OperatorKind::learned, total});
  }
  std::sort(ops.begin(), ops.end(), [](const PlanOperator& a, const PlanOperator& b) {
    return std::tie(a.name, a.body) < std::tie(b.name, b.body);
  });
  return ops;
}

void repair_and_estimate(PlanNode& turn, std::size_t child_index, const NGramModel& model,
                         const History& preceding) {
  if (child_index >= turn.children.size() || turn.children[child_index].kind != PlanNodeKind::repair) {
    throw PreconditionError("no repair node at position " + std::to_string(child_index));
  }
  PlanNode& gap = turn.children[child_index];
  const auto width = gap.leaf_count();
  if (width > static_cast<std::size_t>(kMaxEstimatedGap)) {
    gap.note = "unestimated";
    return;
  }
  History left = preceding;
  History right;
  for (std::size_t i = 0; i < turn.children.size(); ++i) {
    if (i == child_index) continue;
    for (const auto& act : turn.children[i].leaves()) {
      (i < child_index ? left : right).push_back({act, DirectionTag::same_speaker});
    }
  }
  const auto fillers = estimate_gap(model, left, right, static_cast<int>(width));
  std::string note = "estimate:";
  for (const auto& act : fillers.front().acts) note += " " + act;
  gap.note = note;
}

}  // namespace dlgctx
