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

#include "dlgctx/calendar.hpp"

#include <array>

namespace dlgctx::calendar {

namespace chr = std::chrono;

namespace {
constexpr std::array<const char*, 7> kWeekdayAbbrev = {"Mon", "Tue", "Wed", "Thu",
                                                       "Fri", "Sat", "Sun"};
constexpr std::array<const char*, 7> kWeekdayNames = {
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};
constexpr std::array<const char*, 12> kMonthNames = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};
}  // namespace

bool is_leap_year(int year) { return chr::year{year}.is_leap(); }

int days_in_month(int year, int month) {
  const chr::year_month_day_last last{chr::year{year},
                                      chr::month_day_last{chr::month{static_cast<unsigned>(month)}}};
  return static_cast<int>(static_cast<unsigned>(last.day()));
}

bool is_valid_date(int year, int month, int day) {
  if (month < 1 || month > 12 || day < 1) return false;
  return chr::year_month_day{chr::year{year}, chr::month{static_cast<unsigned>(month)},
                             chr::day{static_cast<unsigned>(day)}}
      .ok();
}

chr::sys_days to_days(int year, int month, int day) {
  return chr::sys_days{chr::year_month_day{chr::year{year}, chr::month{static_cast<unsigned>(month)},
                                           chr::day{static_cast<unsigned>(day)}}};
}

chr::year_month_day to_ymd(chr::sys_days d) { return chr::year_month_day{d}; }

int iso_weekday(chr::sys_days d) {
  return static_cast<int>(chr::weekday{d}.iso_encoding());
}

int iso_weekday(int year, int month, int day) { return iso_weekday(to_days(year, month, day)); }

IsoWeek iso_week(chr::sys_days d) {
  // The ISO week belongs to the year that contains its Thursday.
  const chr::sys_days thursday = d + chr::days{4 - iso_weekday(d)};
  const int iso_year = static_cast<int>(to_ymd(thursday).year());
  const chr::sys_days jan1 = to_days(iso_year, 1, 1);
  return {iso_year, static_cast<int>((thursday - jan1).count() / 7) + 1};
}

int weeks_in_iso_year(int year) { return iso_week(to_days(year, 12, 28)).week; }

chr::sys_days monday_of(IsoWeek w) {
  const chr::sys_days jan4 = to_days(w.year, 1, 4);
  return jan4 - chr::days{iso_weekday(jan4) - 1} + chr::days{7 * (w.week - 1)};
}

std::optional<int> parse_weekday(const std::string& name) {
  for (std::size_t i = 0; i < kWeekdayAbbrev.size(); ++i) {
    if (name == kWeekdayAbbrev[i] || name == kWeekdayNames[i]) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

std::string weekday_abbrev(int iso_weekday) { return kWeekdayAbbrev.at(iso_weekday - 1); }
std::string weekday_name(int iso_weekday) { return kWeekdayNames.at(iso_weekday - 1); }
std::string month_name(int month) { return kMonthNames.at(month - 1); }

}  // namespace dlgctx::calendar
