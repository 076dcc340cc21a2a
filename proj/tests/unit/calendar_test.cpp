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

#include <doctest.h>

#include <map>
#include <vector>

#include "dlgctx/calendar.hpp"
#include "oracles.hpp"

using namespace dlgctx::calendar;

using dlgctx::testsupport::walk_calendar;

TEST_CASE("leap years follow the Gregorian rule") {
  CHECK(is_leap_year(1996));
  CHECK(is_leap_year(2000));
  CHECK_FALSE(is_leap_year(1900));
  CHECK_FALSE(is_leap_year(1997));
  CHECK(days_in_month(1996, 2) == 29);
  CHECK(days_in_month(1997, 2) == 28);
  CHECK(days_in_month(1996, 4) == 30);
  CHECK_FALSE(is_valid_date(1996, 4, 31));
  CHECK_FALSE(is_valid_date(1996, 13, 1));
  CHECK(is_valid_date(1996, 2, 29));
}

TEST_CASE("weekday and ISO week agree with a day-by-day walk 1990-2010") {
  const auto days = walk_calendar(2011);
  // Thursday rule: the week belongs to the year of its Thursday.
  std::map<std::pair<int, int>, std::pair<int, int>> by_date_index;
  std::map<int, int> max_week;
  for (std::size_t i = 0; i < days.size(); ++i) {
    const auto& w = days[i];
    if (w.y < 1990 || w.y > 2010) continue;
    REQUIRE(iso_weekday(w.y, w.m, w.d) == w.weekday);
    const auto& thu = days[i - static_cast<std::size_t>(w.weekday) + 4];
    const int week = (thu.ordinal - 1) / 7 + 1;
    const IsoWeek got = iso_week(to_days(w.y, w.m, w.d));
    REQUIRE(got.year == thu.y);
    REQUIRE(got.week == week);
    if (w.weekday == 1) REQUIRE(monday_of(got) == to_days(w.y, w.m, w.d));
    if (thu.y == w.y) max_week[w.y] = std::max(max_week[w.y], week);
  }
  for (int y = 1991; y <= 2010; ++y) CHECK(weeks_in_iso_year(y) == max_week[y]);
}

TEST_CASE("known dates") {
  CHECK(iso_weekday(1996, 2, 8) == 4);
  CHECK(iso_week(to_days(1996, 6, 17)) == IsoWeek{1996, 25});
  CHECK(iso_week(to_days(1996, 6, 23)) == IsoWeek{1996, 25});
  CHECK(iso_week(to_days(2010, 1, 3)) == IsoWeek{2009, 53});
  CHECK(weeks_in_iso_year(2004) == 53);
  CHECK(weeks_in_iso_year(1996) == 52);
  const auto ymd = to_ymd(to_days(1996, 12, 31));
  CHECK(static_cast<int>(ymd.year()) == 1996);
  CHECK(static_cast<unsigned>(ymd.day()) == 31u);
}

TEST_CASE("weekday names") {
  CHECK(parse_weekday("Thu") == 4);
  CHECK(parse_weekday("Thursday") == 4);
  CHECK(parse_weekday("Mon") == 1);
  CHECK_FALSE(parse_weekday("Thx").has_value());
  CHECK(weekday_abbrev(7) == "Sun");
  CHECK(weekday_name(4) == "Thursday");
  CHECK(month_name(4) == "April");
}
