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
#include <optional>
#include <string>

namespace dlgctx::calendar {

struct IsoWeek {
  int year;
  int week;
  bool operator==(const IsoWeek&) const = default;
};

bool is_leap_year(int year);
int days_in_month(int year, int month);
bool is_valid_date(int year, int month, int day);

std::chrono::sys_days to_days(int year, int month, int day);
std::chrono::year_month_day to_ymd(std::chrono::sys_days d);

/// ISO weekday, Monday = 1 .. Sunday = 7.
int iso_weekday(int year, int month, int day);
int iso_weekday(std::chrono::sys_days d);

IsoWeek iso_week(std::chrono::sys_days d);
/// Number of ISO weeks in `year` (52 or 53).
int weeks_in_iso_year(int year);
/// Monday of the given ISO week.
std::chrono::sys_days monday_of(IsoWeek w);

/// Weekday names use three-letter English abbreviations ("Mon".."Sun").
std::optional<int> parse_weekday(const std::string& name);
std::string weekday_abbrev(int iso_weekday);
std::string weekday_name(int iso_weekday);
std::string month_name(int month);

}  // namespace dlgctx::calendar
