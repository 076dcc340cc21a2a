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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dlgctx/cli.hpp"

namespace fs = std::filesystem;
using dlgctx::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run(args, in, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "dlgctx_cli_test";
  fs::create_directories(dir);
  return dir;
}

const std::string kFig1 = (fs::path(DLGCTX_DATA_DIR) / "fig1.json").string();
const std::string kFig1Ops = (fs::path(DLGCTX_DATA_DIR) / "fig1_operators.json").string();

std::string trained_model() {
  const auto model = (scratch() / "fig1_model.json").string();
  REQUIRE(call({"train", "--corpus", kFig1, "--model", model}).code == 0);
  return model;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(call({}).code == 1);
  CHECK(call({"frobnicate"}).code == 1);
  CHECK(call({"train", "--corpus"}).code == 1);
  CHECK(call({"train", "--corpus", kFig1}).code == 1);
  CHECK(call({"train", "--corpus", kFig1, "--model", "m.json", "--held-out", "abc"}).code == 1);
  CHECK(call({"train", "--corpus", kFig1, "--model", "m.json", "--held-out", "1.5"}).code == 1);
  CHECK(call({"train", "--corpus", kFig1, "--model", "m.json", "--max-order", "0"}).code == 1);
  const auto help = call({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("train") != std::string::npos);
}

TEST_CASE("data errors exit with 2 and name the file") {
  const auto empty = scratch() / "empty.json";
  std::ofstream(empty) << R"({"dialogues": []})";
  const auto r = call({"train", "--corpus", empty.string(), "--model", (scratch() / "x.json").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find(empty.string()) != std::string::npos);
  CHECK(r.err.find("no utterances") != std::string::npos);

  const auto missing = call({"train", "--corpus", "/nonexistent/corpus.json", "--model", "x.json"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("/nonexistent/corpus.json") != std::string::npos);

  const auto broken = scratch() / "broken.json";
  std::ofstream(broken) << "[{";
  CHECK(call({"eval", "--model", trained_model(), "--corpus", broken.string()}).code == 2);
}

TEST_CASE("train, eval and learn-ops report their results") {
  const auto model = (scratch() / "m.json").string();
  const auto t = call({"train", "--corpus", kFig1, "--model", model});
  REQUIRE(t.code == 0);
  CHECK(t.out == "lambdas: 0.100000 0.300000 0.600000 (fallback)\n");
  CHECK(fs::exists(model));

  const auto e = call({"eval", "--model", model, "--corpus", kFig1});
  REQUIRE(e.code == 0);
  CHECK(std::regex_match(e.out, std::regex(R"(top-3 hit rate: \d+\.\d\d%\n)")));
  CHECK(call({"eval", "--model", model, "--corpus", kFig1, "--serial"}).out == e.out);
  CHECK(call({"eval", "--model", model, "--corpus", kFig1, "--top-n", "1"}).out.rfind("top-1 hit rate: ", 0) == 0);

  const auto ops = (scratch() / "ops.json").string();
  const auto l = call({"learn-ops", "--corpus", kFig1, "--output", ops, "--min-support", "1"});
  REQUIRE(l.code == 0);
  CHECK(std::regex_match(l.out, std::regex(R"(\d+ operators written to .*\n)")));
  CHECK(fs::exists(ops));
}

TEST_CASE("replay streams one report per utterance") {
  const auto model = trained_model();
  const auto thematic = (scratch() / "thematic.txt").string();
  const auto r = call({"replay", "--corpus", kFig1, "--model", model, "--operators", kFig1Ops, "--thematic-dump",
                       thematic});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::size_t n = 0;
  for (std::string line; std::getline(lines, line); ++n) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["dialogue"] == "fig1");
    CHECK(j.contains("phase"));
    CHECK(j["predictions"].size() == 2);
  }
  CHECK(n > 20);
  std::ifstream f(thematic);
  std::string first;
  std::getline(f, first);
  CHECK(first == "# fig1");

  const auto again = call({"replay", "--corpus", kFig1, "--model", model, "--operators", kFig1Ops});
  CHECK(again.out == r.out);
  CHECK(call({"replay", "--corpus", kFig1, "--model", model, "--clarify-answer", "maybe"}).code == 1);
}

TEST_CASE("interactive session") {
  const auto model = trained_model();
  const std::string script =
      "turn A\n"
      "utt suggest_support_date {\"kind\":\"absolute\",\"month\":4,\"day\":31}\n"
      "y\n"
      "end\n"
      "turn B\n"
      "utt accept_date\n"
      "query agreement\n"
      "query phase\n"
      "bogus\n"
      "turn C\n"
      "quit\n"
      "turn A\n";
  const auto r = call({"interactive", "--model", model, "--speaking-time", "1996-01-10", "--participants", "A,B"},
                      script);
  CHECK(r.code == 0);
  CHECK(r.out.find("turn 0\n") != std::string::npos);
  CHECK(r.out.find("CLARIFY: did you mean April 30? [y/n]\n") != std::string::npos);
  CHECK(r.out.find("{\"day\":30,\"kind\":\"absolute\",\"month\":4}\n") != std::string::npos);
  CHECK(r.out.find("negotiation\n") != std::string::npos);
  CHECK(r.err.find("error: unknown command 'bogus'") != std::string::npos);
  CHECK(r.err.find("error: unknown participant 'C'") != std::string::npos);
  CHECK(r.out.find("turn 2") == std::string::npos);
  CHECK(count_lines(r.err) == 2);
}

TEST_CASE("DLG_CONFIG supplies defaults the command line leaves open") {
  const auto model = trained_model();
  const auto cfg = scratch() / "config.json";
  std::ofstream(cfg) << R"({"top-n": 1, "max-order": 2})";
  ::setenv("DLG_CONFIG", cfg.string().c_str(), 1);
  const auto from_config = call({"eval", "--model", model, "--corpus", kFig1});
  const auto explicit_n = call({"eval", "--model", model, "--corpus", kFig1, "--top-n", "2"});
  ::setenv("DLG_CONFIG", (scratch() / "missing.json").string().c_str(), 1);
  const auto missing = call({"eval", "--model", model, "--corpus", kFig1});
  ::unsetenv("DLG_CONFIG");
  CHECK(from_config.out.rfind("top-1 hit rate: ", 0) == 0);
  CHECK(explicit_n.out.rfind("top-2 hit rate: ", 0) == 0);
  CHECK(missing.code == 2);
}
