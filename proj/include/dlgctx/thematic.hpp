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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dlgctx/corpus.hpp"
#include "dlgctx/time_types.hpp"

namespace dlgctx {

enum class Stance : std::uint8_t { proposed, rejected, accepted };

std::string to_string(Stance stance);

struct Attitude {
  Stance stance = Stance::proposed;
  ParticipantId speaker;
  std::size_t turn_index = 0;
  /// Inferred rather than stated (implicit rejections).
  bool implicit = false;
  /// Memory-wide insertion order, used to find the latest agreement.
  std::uint64_t sequence = 0;
};

using NodeId = std::size_t;

struct ThematicNode {
  Level level = Level::root;
  int lo = 0;
  int hi = 0;
  bool interval = false;
  std::vector<Attitude> attitudes;
  std::vector<NodeId> children;
  std::optional<NodeId> parent;

  Component component() const { return {level, lo, hi, interval}; }
  /// Latest attitude, if any.
  const Attitude* latest() const { return attitudes.empty() ? nullptr : &attitudes.back(); }
};

struct Plausibility {
  bool plausible = true;
  std::string reason;

  static Plausibility ok() { return {}; }
  static Plausibility violation(std::string why) { return {false, std::move(why)}; }
};

/// Resolves a relative expression against the speaking time. Weeks follow
/// ISO-8601. Throws PreconditionError for unsupported units.
TimeDescription resolve_relative(const RelativeTime& expr, const SpeakingTime& speaking_time);

/// First calendar violation in `desc`. `reference_year` stands in for a
/// missing year (leap years, weekday checks, ISO week ranges).
Plausibility check_plausibility(const TimeDescription& desc, int reference_year);

enum class Successor : std::uint8_t { next, following };

std::string to_string(Successor s);

/// `next` iff the referent sits exactly one unit after the speaking time at
/// its finest comparable unit (day, week, month or year). A missing year is
/// taken as the one placing the referent nearest the speaking time.
Successor classify_successor(const TimeDescription& referent, const SpeakingTime& speaking_time);

/// Negotiated dates as a specialization hierarchy. Each negotiation has its
/// own root; nodes below run year > month > week > day > day_of_week >
/// period > time and carry per-speaker attitudes. Single writer.
class ThematicMemory {
 public:
  /// Threads `desc` below the root under consideration, creating nodes as
  /// needed, appends the attitude at the deepest node and moves the focus
  /// there, unless that node encloses the current focus. Returns created
  /// nodes plus the attitude node. A conflict at
  /// month level or coarser opens (or reuses) another root; finer conflicts
  /// become siblings.
  std::vector<NodeId> insert(const TimeDescription& desc, Stance stance, const ParticipantId& speaker,
                             std::size_t turn_index);

  /// Marks competing proposals of the other speaker as implicitly rejected.
  /// Call before inserting `new_desc` as a proposal.
  std::vector<NodeId> infer_implicit_rejection(const TimeDescription& new_desc,
                                               const ParticipantId& speaker, std::size_t turn_index);

  void add_attitude(NodeId node, Stance stance, const ParticipantId& speaker, std::size_t turn_index,
                    bool implicit = false);

  /// Path of the most recently accepted node, extended through accepted
  /// descendants; empty when nothing is accepted.
  TimeDescription current_agreement() const;

  /// Composes the components along the path root -> node.
  TimeDescription describe(NodeId node) const;

  /// `desc` completed with the coarser components of the focus path it
  /// leaves open, e.g. the month for a bare "the 8th".
  TimeDescription contextualize(const TimeDescription& desc) const;

  std::optional<NodeId> focus() const { return focus_; }
  const ThematicNode& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<NodeId>& roots() const { return roots_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return roots_.empty(); }

  /// Node ids from the root down to `id`.
  std::vector<NodeId> path(NodeId id) const;
  /// Stable textual address such as "date1/month=2/day=8".
  std::string path_string(NodeId id) const;
  /// Indented tree, one node per line with its attitudes.
  std::string dump() const;

 private:
  struct Placement {
    std::optional<NodeId> root;
    std::vector<NodeId> matched;
    std::vector<Component> create;
  };

  Placement place(const TimeDescription& desc) const;
  std::optional<Placement> place_under(NodeId root, const std::vector<Component>& comps) const;
  std::optional<NodeId> find_child(NodeId parent, const Component& c) const;
  bool conflicting_child(NodeId parent, const Component& c) const;
  NodeId new_node(std::optional<NodeId> parent, const Component& c);
  NodeId scope_of(NodeId parent, Level level) const;

  std::vector<ThematicNode> nodes_;
  std::vector<NodeId> roots_;
  std::optional<NodeId> focus_;
  std::uint64_t next_sequence_ = 0;
};

}  // namespace dlgctx
