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

#include "dlgctx/time_types.hpp"

#include <charconv>
#include <cstdio>

#include "dlgctx/calendar.hpp"
#include "dlgctx/error.hpp"

namespace dlgctx {

using nlohmann::json;

std::string to_string(Level level) {
  switch (level) {
    case Level::root: return "root";
    case Level::year: return "year";
    case Level::month: return "month";
    case Level::week: return "week";
    case Level::day: return "day";
    case Level::day_of_week: return "day_of_week";
    case Level::period: return "period";
    case Level::time: return "time";
  }
  return "?";
}

Level parse_level(const std::string& name) {
  for (Level l : kDescriptionLevels) {
    if (to_string(l) == name) return l;
  }
  if (name == "dow") return Level::day_of_week;
  if (name == "period_of_day") return Level::period;
  throw FormatError("unknown level '" + name + "'");
}

std::string to_string(Period period) {
  switch (period) {
    case Period::morning: return "morning";
    case Period::afternoon: return "afternoon";
    case Period::evening: return "evening";
  }
  return "?";
}

Period parse_period(const std::string& name) {
  if (name == "morning") return Period::morning;
  if (name == "afternoon") return Period::afternoon;
  if (name == "evening") return Period::evening;
  throw FormatError("unknown period of day '" + name + "'");
}

std::optional<Period> period_of(int clock_minutes) {
  if (clock_minutes >= 18 * 60) return Period::evening;
  if (clock_minutes >= 12 * 60) return Period::afternoon;
  if (clock_minutes >= 6 * 60) return Period::morning;
  return std::nullopt;
}

std::string format_clock(int minutes) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

namespace {

int parse_int(std::string_view text, const std::string& what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw FormatError("malformed " + what + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

int parse_clock(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw FormatError("malformed clock time '" + text + "'");
  const int h = parse_int(std::string_view(text).substr(0, colon), "clock time");
  const int m = parse_int(std::string_view(text).substr(colon + 1), "clock time");
  if (m < 0 || m > 59 || h < 0) throw FormatError("malformed clock time '" + text + "'");
  return h * 60 + m;
}

bool TimeDescription::empty() const {
  return !year && !month && !week && !day && !day_of_week && !period && !clock && !from_to;
}

std::optional<int> TimeDescription::get(Level level) const {
  switch (level) {
    case Level::year: return year;
    case Level::month: return month;
    case Level::week: return week;
    case Level::day: return day;
    case Level::day_of_week: return day_of_week;
    case Level::period:
      if (period) return static_cast<int>(*period);
      return std::nullopt;
    case Level::time: return clock;
    case Level::root: break;
  }
  return std::nullopt;
}

void TimeDescription::set(Level level, int value) {
  switch (level) {
    case Level::year: year = value; break;
    case Level::month: month = value; break;
    case Level::week: week = value; break;
    case Level::day: day = value; break;
    case Level::day_of_week: day_of_week = value; break;
    case Level::period: period = static_cast<Period>(value); break;
    case Level::time: clock = value; break;
    case Level::root: break;
  }
}

void TimeDescription::clear(Level level) {
  switch (level) {
    case Level::year: year.reset(); break;
    case Level::month: month.reset(); break;
    case Level::week: week.reset(); break;
    case Level::day: day.reset(); break;
    case Level::day_of_week: day_of_week.reset(); break;
    case Level::period: period.reset(); break;
    case Level::time: clock.reset(); break;
    case Level::root: break;
  }
  if (from_to && from_to->level == level) from_to.reset();
}

bool TimeDescription::specifies(Level level) const {
  return get(level).has_value() || (from_to && from_to->level == level);
}

std::vector<Component> components(const TimeDescription& desc) {
  std::vector<Component> out;
  for (Level level : kDescriptionLevels) {
    if (desc.from_to && desc.from_to->level == level) {
      out.push_back({level, desc.from_to->lo, desc.from_to->hi, true});
    } else if (auto v = desc.get(level)) {
      out.push_back({level, *v, *v, false});
    }
  }
  return out;
}

std::string format_component_value(Level level, int value) {
  switch (level) {
    case Level::day_of_week:
      if (value >= 1 && value <= 7) return calendar::weekday_abbrev(value);
      break;
    case Level::period:
      if (value >= 0 && value <= 2) return to_string(static_cast<Period>(value));
      break;
    case Level::time: return format_clock(value);
    default: break;
  }
  return std::to_string(value);
}

std::string to_display(const TimeDescription& desc) {
  std::vector<std::string> parts;
  if (desc.day_of_week && *desc.day_of_week >= 1 && *desc.day_of_week <= 7) {
    parts.push_back(calendar::weekday_name(*desc.day_of_week));
  }
  std::string date;
  if (desc.month && *desc.month >= 1 && *desc.month <= 12) date = calendar::month_name(*desc.month);
  if (desc.day) date += (date.empty() ? "day " : " ") + std::to_string(*desc.day);
  if (!date.empty()) parts.push_back(date);
  if (desc.year) parts.push_back(std::to_string(*desc.year));
  if (desc.week) parts.push_back("week " + std::to_string(*desc.week));
  if (desc.period) parts.push_back(to_string(*desc.period));
  if (desc.clock) parts.push_back(format_clock(*desc.clock));
  if (desc.from_to) {
    parts.push_back(to_string(desc.from_to->level) + " " +
                    format_component_value(desc.from_to->level, desc.from_to->lo) + " to " +
                    format_component_value(desc.from_to->level, desc.from_to->hi));
  }
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ", ";
    out += p;
  }
  return out.empty() ? "(unspecified)" : out;
}

std::chrono::sys_days SpeakingTime::date() const { return calendar::to_days(year, month, day); }

SpeakingTime parse_speaking_time(const std::string& text) {
  // YYYY-MM-DD or YYYY-MM-DDTHH:MM
  if (text.size() != 10 && text.size() != 16) {
    throw FormatError("malformed speaking_time '" + text + "'");
  }
  if (text[4] != '-' || text[7] != '-' || (text.size() == 16 && text[10] != 'T')) {
    throw FormatError("malformed speaking_time '" + text + "'");
  }
  const std::string_view sv(text);
  SpeakingTime t;
  t.year = parse_int(sv.substr(0, 4), "speaking_time");
  t.month = parse_int(sv.substr(5, 2), "speaking_time");
  t.day = parse_int(sv.substr(8, 2), "speaking_time");
  if (!calendar::is_valid_date(t.year, t.month, t.day)) {
    throw ValidationError("invalid speaking_time '" + text + "'");
  }
  if (text.size() == 16) {
    const int clock = parse_clock(text.substr(11));
    if (clock >= 24 * 60) throw ValidationError("invalid speaking_time '" + text + "'");
    t.clock = clock;
  }
  return t;
}

std::string to_string(const SpeakingTime& t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", t.year, t.month, t.day);
  std::string out = buf;
  if (t.clock) out += "T" + format_clock(*t.clock);
  return out;
}

json to_json(const TimeDescription& desc) {
  json j = json::object();
  j["kind"] = "absolute";
  if (desc.year) j["year"] = *desc.year;
  if (desc.month) j["month"] = *desc.month;
  if (desc.week) j["week"] = *desc.week;
  if (desc.day) j["day"] = *desc.day;
  if (desc.day_of_week) j["dow"] = format_component_value(Level::day_of_week, *desc.day_of_week);
  if (desc.period) j["period"] = to_string(*desc.period);
  if (desc.clock) j["time"] = format_clock(*desc.clock);
  if (desc.from_to) {
    json ft = {{"level", to_string(desc.from_to->level)}};
    if (desc.from_to->level == Level::time) {
      ft["lo"] = format_clock(desc.from_to->lo);
      ft["hi"] = format_clock(desc.from_to->hi);
    } else {
      ft["lo"] = desc.from_to->lo;
      ft["hi"] = desc.from_to->hi;
    }
    j["from_to"] = ft;
  }
  return j;
}

json to_json(const TimeExpression& expr) {
  if (const auto* desc = std::get_if<TimeDescription>(&expr)) return to_json(*desc);
  const auto& rel = std::get<RelativeTime>(expr);
  json j = {{"kind", "relative"}, {"unit", to_string(rel.unit)}, {"offset", rel.offset}};
  if (rel.day_of_week) j["dow"] = calendar::weekday_abbrev(*rel.day_of_week);
  return j;
}

namespace {

int int_field(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw FormatError(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

int weekday_field(const json& j) {
  const auto& v = j.at("dow");
  if (v.is_number_integer()) return v.get<int>();
  if (!v.is_string()) throw FormatError("field 'dow' must be a weekday name");
  auto wd = calendar::parse_weekday(v.get<std::string>());
  if (!wd) throw FormatError("unknown weekday '" + v.get<std::string>() + "'");
  return *wd;
}

int interval_bound(const json& v, Level level) {
  if (level == Level::time && v.is_string()) return parse_clock(v.get<std::string>());
  if (level == Level::period && v.is_string()) return static_cast<int>(parse_period(v.get<std::string>()));
  if (level == Level::day_of_week && v.is_string()) {
    auto wd = calendar::parse_weekday(v.get<std::string>());
    if (!wd) throw FormatError("unknown weekday '" + v.get<std::string>() + "'");
    return *wd;
  }
  if (!v.is_number_integer()) throw FormatError("from_to bounds must be integers");
  return v.get<int>();
}

}  // namespace

TimeDescription time_description_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("time expression must be an object");
  TimeDescription d;
  try {
    if (j.contains("year")) d.year = int_field(j, "year");
    if (j.contains("month")) d.month = int_field(j, "month");
    if (j.contains("week")) d.week = int_field(j, "week");
    if (j.contains("day")) d.day = int_field(j, "day");
    if (j.contains("dow")) d.day_of_week = weekday_field(j);
    if (j.contains("period")) d.period = parse_period(j.at("period").get<std::string>());
    if (j.contains("time")) d.clock = parse_clock(j.at("time").get<std::string>());
    if (j.contains("from_to")) {
      const auto& ft = j.at("from_to");
      FromTo interval;
      interval.level = parse_level(ft.at("level").get<std::string>());
      interval.lo = interval_bound(ft.at("lo"), interval.level);
      interval.hi = interval_bound(ft.at("hi"), interval.level);
      if (d.get(interval.level)) {
        throw FormatError("from_to and a point value share level " + to_string(interval.level));
      }
      d.from_to = interval;
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed time expression: ") + e.what());
  }
  if (d.empty()) throw FormatError("time expression names no component");
  return d;
}

TimeExpression time_expression_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("time expression must be an object");
  const std::string kind = j.value("kind", std::string("absolute"));
  if (kind == "absolute") return time_description_from_json(j);
  if (kind != "relative") throw FormatError("unknown time expression kind '" + kind + "'");
  RelativeTime rel;
  try {
    rel.unit = parse_level(j.at("unit").get<std::string>());
    rel.offset = j.contains("offset") ? int_field(j, "offset") : 0;
    if (j.contains("dow")) rel.day_of_week = weekday_field(j);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed relative time expression: ") + e.what());
  }
  return rel;
}

}  // namespace dlgctx
