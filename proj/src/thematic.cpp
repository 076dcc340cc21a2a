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

#include "dlgctx/thematic.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "dlgctx/calendar.hpp"
#include "dlgctx/error.hpp"

namespace dlgctx {

namespace chr = std::chrono;

std::string to_string(Stance stance) {
  switch (stance) {
    case Stance::proposed: return "proposed";
    case Stance::rejected: return "rejected";
    case Stance::accepted: return "accepted";
  }
  return "?";
}

std::string to_string(Successor s) { return s == Successor::next ? "next" : "following"; }

TimeDescription resolve_relative(const RelativeTime& expr, const SpeakingTime& speaking_time) {
  const chr::sys_days anchor = speaking_time.date();
  const int k = expr.offset;
  TimeDescription out;
  auto set_date = [&out](chr::sys_days d) {
    const auto ymd = calendar::to_ymd(d);
    out.year = static_cast<int>(ymd.year());
    out.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
    out.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
  };
  switch (expr.unit) {
    case Level::year:
      out.year = speaking_time.year + k;
      break;
    case Level::month: {
      const auto ym = chr::year_month{chr::year{speaking_time.year},
                                      chr::month{static_cast<unsigned>(speaking_time.month)}} +
                      chr::months{k};
      out.year = static_cast<int>(ym.year());
      out.month = static_cast<int>(static_cast<unsigned>(ym.month()));
      break;
    }
    case Level::week: {
      const auto w = calendar::iso_week(anchor + chr::days{7 * k});
      out.year = w.year;
      out.week = w.week;
      break;
    }
    case Level::day:
      set_date(anchor + chr::days{k});
      break;
    case Level::day_of_week: {
      if (!expr.day_of_week || *expr.day_of_week < 1 || *expr.day_of_week > 7) {
        throw PreconditionError("relative day_of_week expression needs a weekday");
      }
      const int target = *expr.day_of_week;
      const int today = calendar::iso_weekday(anchor);
      chr::sys_days d;
      if (k > 0) {
        int ahead = (target - today + 7) % 7;
        if (ahead == 0) ahead = 7;
        d = anchor + chr::days{ahead + 7 * (k - 1)};
      } else if (k < 0) {
        int back = (today - target + 7) % 7;
        if (back == 0) back = 7;
        d = anchor - chr::days{back + 7 * (-k - 1)};
      } else {
        d = anchor + chr::days{target - today};
      }
      set_date(d);
      out.day_of_week = target;
      break;
    }
    case Level::time: {
      if (!speaking_time.clock) {
        throw PreconditionError("relative clock time needs a speaking time with a clock");
      }
      const long total = *speaking_time.clock + static_cast<long>(k);
      long day_shift = total / (24 * 60);
      long minutes = total % (24 * 60);
      if (minutes < 0) {
        minutes += 24 * 60;
        --day_shift;
      }
      set_date(anchor + chr::days{day_shift});
      out.clock = static_cast<int>(minutes);
      break;
    }
    case Level::period:
    case Level::root:
      throw PreconditionError("relative expressions over unit '" + to_string(expr.unit) +
                              "' are not supported");
  }
  return out;
}

namespace {

std::string month_length_reason(int year, int month, bool year_known) {
  std::string name = calendar::month_name(month);
  if (month == 2 && year_known) name += " " + std::to_string(year);
  return name + " has " + std::to_string(calendar::days_in_month(year, month)) + " days";
}

/// Checks a single value as if it were the point component at `level`.
Plausibility check_value(Level level, int value, const TimeDescription& desc, int year) {
  switch (level) {
    case Level::year:
      return Plausibility::ok();
    case Level::month:
      if (value < 1 || value > 12) return Plausibility::violation("month " + std::to_string(value) + " out of range");
      return Plausibility::ok();
    case Level::week: {
      const int weeks = calendar::weeks_in_iso_year(year);
      if (value < 1 || value > weeks) {
        return Plausibility::violation("week " + std::to_string(value) + " out of range; " +
                                       std::to_string(year) + " has " + std::to_string(weeks) + " weeks");
      }
      return Plausibility::ok();
    }
    case Level::day:
      if (value < 1 || value > 31) return Plausibility::violation("day " + std::to_string(value) + " out of range");
      if (desc.month && *desc.month >= 1 && *desc.month <= 12 &&
          value > calendar::days_in_month(year, *desc.month)) {
        return Plausibility::violation(month_length_reason(year, *desc.month, desc.year.has_value()));
      }
      return Plausibility::ok();
    case Level::day_of_week:
      if (value < 1 || value > 7) return Plausibility::violation("weekday " + std::to_string(value) + " out of range");
      return Plausibility::ok();
    case Level::period:
      if (value < 0 || value > 2) return Plausibility::violation("period of day out of range");
      return Plausibility::ok();
    case Level::time:
      if (value < 0 || value >= 24 * 60) {
        return Plausibility::violation("clock time " + std::to_string(value / 60) + ":" +
                                       std::to_string(value % 60) + " out of range");
      }
      return Plausibility::ok();
    case Level::root:
      break;
  }
  return Plausibility::ok();
}

}  // namespace

Plausibility check_plausibility(const TimeDescription& desc, int reference_year) {
  const int year = desc.year.value_or(reference_year);
  for (const Component& c : components(desc)) {
    if (c.interval) {
      if (c.lo > c.hi) {
        return Plausibility::violation("interval " + std::to_string(c.lo) + ".." + std::to_string(c.hi) +
                                       " is reversed");
      }
      for (int bound : {c.lo, c.hi}) {
        auto verdict = check_value(c.level, bound, desc, year);
        if (!verdict.plausible) return verdict;
      }
    } else {
      auto verdict = check_value(c.level, c.lo, desc, year);
      if (!verdict.plausible) return verdict;
    }
  }
  if (desc.day_of_week && desc.month && desc.day &&
      calendar::is_valid_date(year, *desc.month, *desc.day)) {
    const int actual = calendar::iso_weekday(year, *desc.month, *desc.day);
    if (actual != *desc.day_of_week) {
      char date[16];
      std::snprintf(date, sizeof date, "%04d-%02d-%02d", year, *desc.month, *desc.day);
      return Plausibility::violation(std::string(date) + " is a " + calendar::weekday_name(actual) +
                                     ", not a " + calendar::weekday_name(*desc.day_of_week));
    }
  }
  return Plausibility::ok();
}

namespace {

/// Picks the candidate position nearest `anchor`, later one on ties.
long nearest(const std::vector<long>& candidates, long anchor) {
  long best = candidates.front();
  for (long c : candidates) {
    const long d = std::labs(c - anchor);
    const long bd = std::labs(best - anchor);
    if (d < bd || (d == bd && c > best)) best = c;
  }
  return best;
}

}  // namespace

Successor classify_successor(const TimeDescription& referent, const SpeakingTime& speaking_time) {
  const chr::sys_days anchor = speaking_time.date();
  const int y = speaking_time.year;
  std::vector<int> years;
  if (referent.year) {
    years = {*referent.year};
  } else {
    years = {y - 1, y, y + 1};
  }
  long position = 0;
  long anchor_position = 0;
  if (referent.day && referent.month) {
    std::vector<long> c;
    for (int yy : years) {
      if (calendar::is_valid_date(yy, *referent.month, *referent.day)) {
        c.push_back(calendar::to_days(yy, *referent.month, *referent.day).time_since_epoch().count());
      }
    }
    if (c.empty()) throw PreconditionError("referent is not a valid date");
    anchor_position = anchor.time_since_epoch().count();
    position = nearest(c, anchor_position);
  } else if (referent.week) {
    std::vector<long> c;
    for (int yy : years) {
      if (*referent.week >= 1 && *referent.week <= calendar::weeks_in_iso_year(yy)) {
        c.push_back(calendar::monday_of({yy, *referent.week}).time_since_epoch().count() / 7);
      }
    }
    if (c.empty()) throw PreconditionError("referent week out of range");
    anchor_position = calendar::monday_of(calendar::iso_week(anchor)).time_since_epoch().count() / 7;
    position = nearest(c, anchor_position);
  } else if (referent.month) {
    if (*referent.month < 1 || *referent.month > 12) throw PreconditionError("referent month out of range");
    std::vector<long> c;
    for (int yy : years) c.push_back(static_cast<long>(yy) * 12 + (*referent.month - 1));
    anchor_position = static_cast<long>(y) * 12 + (speaking_time.month - 1);
    position = nearest(c, anchor_position);
  } else if (referent.year) {
    position = *referent.year;
    anchor_position = y;
  } else {
    throw PreconditionError("referent shares no comparable unit with the speaking time");
  }
  return position == anchor_position + 1 ? Successor::next : Successor::following;
}

// ---------------------------------------------------------------------------

NodeId ThematicMemory::new_node(std::optional<NodeId> parent, const Component& c) {
  ThematicNode n;
  n.level = c.level;
  n.lo = c.lo;
  n.hi = c.hi;
  n.interval = c.interval;
  n.parent = parent;
  nodes_.push_back(std::move(n));
  const NodeId id = nodes_.size() - 1;
  if (parent) {
    nodes_[*parent].children.push_back(id);
  } else {
    roots_.push_back(id);
  }
  return id;
}

std::optional<NodeId> ThematicMemory::find_child(NodeId parent, const Component& c) const {
  for (NodeId child : nodes_[parent].children) {
    if (nodes_[child].component() == c) return child;
  }
  return std::nullopt;
}

bool ThematicMemory::conflicting_child(NodeId parent, const Component& c) const {
  return std::any_of(nodes_[parent].children.begin(), nodes_[parent].children.end(), [&](NodeId child) {
    return nodes_[child].level == c.level && !(nodes_[child].component() == c);
  });
}

std::vector<NodeId> ThematicMemory::path(NodeId id) const {
  std::vector<NodeId> out;
  for (std::optional<NodeId> cur = id; cur; cur = nodes_.at(*cur).parent) out.push_back(*cur);
  std::reverse(out.begin(), out.end());
  return out;
}

std::optional<ThematicMemory::Placement> ThematicMemory::place_under(
    NodeId root, const std::vector<Component>& comps) const {
  Placement p{root, {}, {}};
  NodeId cur = root;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (auto child = find_child(cur, comps[i])) {
      p.matched.push_back(*child);
      cur = *child;
      continue;
    }
    if (i == 0 || (comps[i].level <= Level::month && conflicting_child(cur, comps[i]))) {
      return std::nullopt;
    }
    p.create.assign(comps.begin() + static_cast<std::ptrdiff_t>(i), comps.end());
    break;
  }
  return p;
}

ThematicMemory::Placement ThematicMemory::place(const TimeDescription& desc) const {
  const auto comps = components(desc);
  if (comps.empty()) throw PreconditionError("time description names no component");
  if (roots_.empty() || !focus_) return {std::nullopt, {}, comps};

  auto elsewhere = [&](NodeId skip) -> Placement {
    for (NodeId r : roots_) {
      if (r == skip) continue;
      if (auto p = place_under(r, comps)) return *p;
    }
    return {std::nullopt, {}, comps};
  };

  const auto focus_path = path(*focus_);
  const NodeId root = focus_path.front();
  Placement p{root, {}, {}};
  NodeId cur = root;
  std::size_t i = 0;
  // Follow the focus while it agrees with, or is coarser than, the
  // description.
  for (std::size_t k = 1; k < focus_path.size() && i < comps.size(); ++k) {
    const ThematicNode& n = nodes_[focus_path[k]];
    if (comps[i].level == n.level) {
      if (n.component() == comps[i]) {
        p.matched.push_back(focus_path[k]);
        cur = focus_path[k];
        ++i;
        continue;
      }
      if (n.level <= Level::month) return elsewhere(root);
      break;
    }
    if (n.level < comps[i].level) {
      p.matched.push_back(focus_path[k]);
      cur = focus_path[k];
      continue;
    }
    break;
  }
  for (; i < comps.size(); ++i) {
    if (auto child = find_child(cur, comps[i])) {
      p.matched.push_back(*child);
      cur = *child;
      continue;
    }
    if (comps[i].level <= Level::month && conflicting_child(cur, comps[i])) return elsewhere(root);
    p.create.assign(comps.begin() + static_cast<std::ptrdiff_t>(i), comps.end());
    break;
  }
  return p;
}

void ThematicMemory::add_attitude(NodeId node, Stance stance, const ParticipantId& speaker,
                                  std::size_t turn_index, bool implicit) {
  ThematicNode& n = nodes_.at(node);
  if (n.level == Level::root) throw PreconditionError("attitudes attach to date components, not roots");
  if (!n.attitudes.empty() && n.attitudes.back().turn_index > turn_index) {
    throw PreconditionError("attitude turn index goes backwards");
  }
  n.attitudes.push_back({stance, speaker, turn_index, implicit, next_sequence_++});
}

std::vector<NodeId> ThematicMemory::insert(const TimeDescription& desc, Stance stance,
                                           const ParticipantId& speaker, std::size_t turn_index) {
  const Placement p = place(desc);
  // Validate monotonicity before mutating anything.
  if (p.create.empty()) {
    const ThematicNode& target = nodes_[p.matched.back()];
    if (!target.attitudes.empty() && target.attitudes.back().turn_index > turn_index) {
      throw PreconditionError("attitude turn index goes backwards");
    }
  }
  std::vector<NodeId> affected;
  NodeId cur = p.root ? *p.root : new_node(std::nullopt, {Level::root, 0, 0, false});
  if (!p.matched.empty()) cur = p.matched.back();
  for (const Component& c : p.create) {
    cur = new_node(cur, c);
    affected.push_back(cur);
  }
  add_attitude(cur, stance, speaker, turn_index);
  if (affected.empty()) affected.push_back(cur);
  // An attitude on an enclosing date keeps the more specific focus below it.
  bool encloses_focus = false;
  if (p.create.empty() && focus_ && *focus_ != cur) {
    const auto focus_path = path(*focus_);
    encloses_focus = std::find(focus_path.begin(), focus_path.end(), cur) != focus_path.end();
  }
  if (!encloses_focus) focus_ = cur;
  return affected;
}

NodeId ThematicMemory::scope_of(NodeId parent, Level level) const {
  // Clock times are compared across period-of-day nodes: a time under
  // "afternoon" competes with a time directly under the same day.
  if (level == Level::time) {
    while (nodes_[parent].level == Level::period && nodes_[parent].parent) parent = *nodes_[parent].parent;
  }
  return parent;
}

std::vector<NodeId> ThematicMemory::infer_implicit_rejection(const TimeDescription& new_desc,
                                                             const ParticipantId& speaker,
                                                             std::size_t turn_index) {
  if (roots_.empty()) return {};
  const auto comps = components(new_desc);
  if (comps.empty()) return {};
  const Placement p = place(new_desc);
  if (!p.root || p.create.size() >= 2) return {};
  const Component& fresh = comps.back();

  std::optional<NodeId> self;
  NodeId parent;
  if (p.create.empty()) {
    self = p.matched.back();
    parent = *nodes_[*self].parent;
  } else {
    parent = p.matched.empty() ? *p.root : p.matched.back();
  }
  const NodeId scope = scope_of(parent, fresh.level);

  std::vector<NodeId> candidates;
  for (NodeId child : nodes_[scope].children) {
    if (nodes_[child].level == fresh.level) candidates.push_back(child);
    if (fresh.level == Level::time && nodes_[child].level == Level::period) {
      for (NodeId grandchild : nodes_[child].children) {
        if (nodes_[grandchild].level == Level::time) candidates.push_back(grandchild);
      }
    }
  }

  std::vector<NodeId> marked;
  for (NodeId c : candidates) {
    if (self && c == *self) continue;
    const ThematicNode& n = nodes_[c];
    const Attitude* last = n.latest();
    if (!last || last->stance != Stance::proposed || last->speaker == speaker) continue;
    bool competing;
    if (n.interval) {
      competing = fresh.lo < n.lo || fresh.hi > n.hi;
    } else if (fresh.interval) {
      competing = n.lo < fresh.lo || n.lo > fresh.hi;
    } else {
      competing = n.lo != fresh.lo;
    }
    if (!competing) continue;
    if (last->turn_index > turn_index) continue;
    add_attitude(c, Stance::rejected, speaker, turn_index, true);
    marked.push_back(c);
  }
  return marked;
}

TimeDescription ThematicMemory::describe(NodeId id) const {
  TimeDescription d;
  for (NodeId n : path(id)) {
    const ThematicNode& node = nodes_[n];
    if (node.level == Level::root) continue;
    if (node.interval) {
      d.from_to = FromTo{node.level, node.lo, node.hi};
    } else {
      d.set(node.level, node.lo);
    }
  }
  return d;
}

TimeDescription ThematicMemory::current_agreement() const {
  auto accepted = [this](NodeId id) {
    const Attitude* last = nodes_[id].latest();
    return last && last->stance == Stance::accepted;
  };
  std::optional<NodeId> best;
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    if (!accepted(id)) continue;
    if (!best) {
      best = id;
      continue;
    }
    const auto seq = nodes_[id].latest()->sequence;
    const auto best_seq = nodes_[*best].latest()->sequence;
    if (seq > best_seq || (seq == best_seq && path(id).size() > path(*best).size())) best = id;
  }
  if (!best) return {};
  for (;;) {
    std::optional<NodeId> next;
    for (NodeId child : nodes_[*best].children) {
      if (accepted(child) && (!next || nodes_[child].latest()->sequence > nodes_[*next].latest()->sequence)) {
        next = child;
      }
    }
    if (!next) break;
    best = next;
  }
  return describe(*best);
}

TimeDescription ThematicMemory::contextualize(const TimeDescription& desc) const {
  const auto comps = components(desc);
  if (comps.empty() || !focus_) return desc;
  TimeDescription out = desc;
  for (NodeId id : path(*focus_)) {
    const ThematicNode& n = nodes_[id];
    if (n.level == Level::root) continue;
    if (n.level >= comps.front().level) break;
    if (out.specifies(n.level)) continue;
    if (n.interval) {
      if (!out.from_to) out.from_to = FromTo{n.level, n.lo, n.hi};
    } else {
      out.set(n.level, n.lo);
    }
  }
  return out;
}

namespace {

std::string node_value(const ThematicNode& n) {
  if (n.interval) {
    return "FROM_TO(" + format_component_value(n.level, n.lo) + "," + format_component_value(n.level, n.hi) +
           ")";
  }
  return format_component_value(n.level, n.lo);
}

}  // namespace

std::string ThematicMemory::path_string(NodeId id) const {
  std::string out;
  for (NodeId n : path(id)) {
    const ThematicNode& node = nodes_[n];
    if (node.level == Level::root) {
      const auto r = std::find(roots_.begin(), roots_.end(), n) - roots_.begin();
      out += "date" + std::to_string(r + 1);
    } else {
      out += "/" + to_string(node.level) + "=" + node_value(node);
    }
  }
  return out;
}

std::string ThematicMemory::dump() const {
  std::ostringstream out;
  std::function<void(NodeId, int)> walk = [&](NodeId id, int depth) {
    const ThematicNode& n = nodes_[id];
    out << std::string(static_cast<std::size_t>(depth) * 2, ' ');
    if (n.level == Level::root) {
      out << "date" << (std::find(roots_.begin(), roots_.end(), id) - roots_.begin() + 1);
    } else {
      out << to_string(n.level) << ' ' << node_value(n);
    }
    if (!n.attitudes.empty()) {
      out << " [";
      for (std::size_t i = 0; i < n.attitudes.size(); ++i) {
        const Attitude& a = n.attitudes[i];
        out << (i ? ", " : "") << to_string(a.stance) << (a.implicit ? "(implicit)" : "") << ':' << a.speaker
            << '@' << a.turn_index;
      }
      out << ']';
    }
    if (focus_ && *focus_ == id) out << " *";
    out << '\n';
    for (NodeId child : n.children) walk(child, depth + 1);
  };
  for (NodeId r : roots_) walk(r, 0);
  return out.str();
}

}  // namespace dlgctx
