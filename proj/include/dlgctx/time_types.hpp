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

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace dlgctx {

/// Granularity levels of the thematic hierarchy, coarse to fine. `root` is
/// the synthetic level of a negotiation root and never appears in a
/// description.
enum class Level : std::uint8_t { root, year, month, week, day, day_of_week, period, time };

inline constexpr Level kDescriptionLevels[] = {Level::year,        Level::month,  Level::week,
                                               Level::day,         Level::day_of_week,
                                               Level::period,      Level::time};

enum class Period : std::uint8_t { morning, afternoon, evening };

std::string to_string(Level level);
Level parse_level(const std::string& name);
std::string to_string(Period period);
Period parse_period(const std::string& name);
/// Period containing a clock time (minutes since midnight); nullopt before 06:00.
std::optional<Period> period_of(int clock_minutes);

std::string format_clock(int minutes);
/// Parses "HH:MM"; throws FormatError.
int parse_clock(const std::string& text);

/// An interval at one level, e.g. days 6..9 of a month.
struct FromTo {
  Level level = Level::day;
  int lo = 0;
  int hi = 0;
  bool operator==(const FromTo&) const = default;
};

/// A partial date. Clock time is stored as minutes since midnight and
/// day_of_week as ISO weekday (Mon = 1).
struct TimeDescription {
  std::optional<int> year;
  std::optional<int> month;
  std::optional<int> week;
  std::optional<int> day;
  std::optional<int> day_of_week;
  std::optional<Period> period;
  std::optional<int> clock;
  std::optional<FromTo> from_to;

  bool empty() const;
  /// Point value at a level (period as its enumerator index).
  std::optional<int> get(Level level) const;
  void set(Level level, int value);
  void clear(Level level);
  bool specifies(Level level) const;

  bool operator==(const TimeDescription&) const = default;
};

/// One level of a description: a point (lo == hi, !interval) or a FROM_TO.
struct Component {
  Level level;
  int lo;
  int hi;
  bool interval;
  bool operator==(const Component&) const = default;
};

/// Components ordered coarse to fine. A FROM_TO replaces the point value at
/// its level.
std::vector<Component> components(const TimeDescription& desc);

/// Readable rendering used in prompts, e.g. "Thursday, February 8, 14:00".
std::string to_display(const TimeDescription& desc);
std::string format_component_value(Level level, int value);

struct RelativeTime {
  Level unit = Level::day;
  int offset = 0;
  /// Required when unit == day_of_week.
  std::optional<int> day_of_week;
  bool operator==(const RelativeTime&) const = default;
};

using TimeExpression = std::variant<TimeDescription, RelativeTime>;

/// Deictic anchor of a dialogue.
struct SpeakingTime {
  int year = 1970;
  int month = 1;
  int day = 1;
  std::optional<int> clock;

  std::chrono::sys_days date() const;
  bool operator==(const SpeakingTime&) const = default;
};

/// "YYYY-MM-DD[THH:MM]"; throws ValidationError for impossible dates.
SpeakingTime parse_speaking_time(const std::string& text);
std::string to_string(const SpeakingTime& t);

nlohmann::json to_json(const TimeDescription& desc);
nlohmann::json to_json(const TimeExpression& expr);
/// Decodes either kind; throws FormatError on malformed objects.
TimeExpression time_expression_from_json(const nlohmann::json& j);
/// Decodes an absolute description (the "kind" member is optional here).
TimeDescription time_description_from_json(const nlohmann::json& j);

}  // namespace dlgctx
