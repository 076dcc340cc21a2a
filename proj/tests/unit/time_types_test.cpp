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

#include "dlgctx/error.hpp"
#include "dlgctx/time_types.hpp"

using namespace dlgctx;

TEST_CASE("period boundaries") {
  CHECK_FALSE(period_of(5 * 60 + 59).has_value());
  CHECK(period_of(6 * 60) == Period::morning);
  CHECK(period_of(11 * 60 + 59) == Period::morning);
  CHECK(period_of(12 * 60) == Period::afternoon);
  CHECK(period_of(17 * 60 + 59) == Period::afternoon);
  CHECK(period_of(18 * 60) == Period::evening);
}

TEST_CASE("clock parsing") {
  CHECK(parse_clock("08:30") == 510);
  CHECK(parse_clock("14:00") == 840);
  CHECK(format_clock(510) == "08:30");
  CHECK_THROWS_AS(parse_clock("0830"), FormatError);
  CHECK_THROWS_AS(parse_clock("08:61"), FormatError);
  CHECK_THROWS_AS(parse_clock("ab:cd"), FormatError);
  for (int m = 0; m < 24 * 60; m += 7) CHECK(parse_clock(format_clock(m)) == m);
}

TEST_CASE("components run coarse to fine and intervals replace points") {
  TimeDescription d;
  d.clock = 840;
  d.month = 2;
  d.day_of_week = 4;
  d.from_to = FromTo{Level::day, 6, 9};
  d.day = 8;
  const auto c = components(d);
  REQUIRE(c.size() == 4);
  CHECK(c[0] == Component{Level::month, 2, 2, false});
  CHECK(c[1] == Component{Level::day, 6, 9, true});
  CHECK(c[2] == Component{Level::day_of_week, 4, 4, false});
  CHECK(c[3] == Component{Level::time, 840, 840, false});
  CHECK(components(TimeDescription{}).empty());
}

TEST_CASE("display rendering") {
  TimeDescription d;
  d.month = 2;
  d.day = 8;
  d.day_of_week = 4;
  d.clock = 840;
  CHECK(to_display(d) == "Thursday, February 8, 14:00");
  TimeDescription april;
  april.month = 4;
  april.day = 30;
  CHECK(to_display(april) == "April 30");
  CHECK(to_display(TimeDescription{}) == "(unspecified)");
}

TEST_CASE("time expression JSON round trip") {
  TimeDescription d;
  d.year = 1996;
  d.month = 1;
  d.from_to = FromTo{Level::day, 15, 19};
  d.day_of_week = 3;
  d.period = Period::afternoon;
  CHECK(std::get<TimeDescription>(time_expression_from_json(to_json(d))) == d);

  TimeDescription t;
  t.from_to = FromTo{Level::time, 600, 720};
  const auto j = to_json(t);
  CHECK(j["from_to"]["lo"] == "10:00");
  CHECK(std::get<TimeDescription>(time_expression_from_json(j)) == t);

  RelativeTime r{Level::week, -2, std::nullopt};
  CHECK(std::get<RelativeTime>(time_expression_from_json(to_json(TimeExpression{r}))) == r);
  RelativeTime next_fri{Level::day_of_week, 1, 5};
  CHECK(std::get<RelativeTime>(time_expression_from_json(to_json(TimeExpression{next_fri}))) == next_fri);

  CHECK_THROWS_AS(time_expression_from_json(nlohmann::json{{"kind", "absolute"}, {"month", "x"}}), FormatError);
  CHECK_THROWS_AS(time_expression_from_json(nlohmann::json::array()), FormatError);
}

TEST_CASE("speaking time") {
  const auto t = parse_speaking_time("1996-01-10T10:00");
  CHECK(t.year == 1996);
  CHECK(t.clock == 600);
  CHECK(to_string(t) == "1996-01-10T10:00");
  CHECK(to_string(parse_speaking_time("1996-06-17")) == "1996-06-17");
  CHECK_THROWS_AS(parse_speaking_time("1996-02-30"), ValidationError);
  CHECK_THROWS_AS(parse_speaking_time("1996/02/03"), FormatError);
}
