// Copyright 2026 The cohflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "cohflow/cli.hpp"

using namespace cohflow;
using namespace cohflow::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const RunSpec& spec) {
  std::ostringstream out, err;
  const int code = run(spec, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) v.push_back(line);
  return v;
}

RunSpec detect_spec(Mode mode, double a, double p) {
  RunSpec s;
  s.command = Command::detect;
  s.mode = mode;
  s.a = a;
  s.p = p;
  return s;
}

Result shell(const std::string& args) {
  const std::string cmd = std::string(COHFLOW_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, {}};
}

}  // namespace

TEST_CASE("number formatting", "[cli]") {
  CHECK(format_number(std::sqrt(0.5)) == "0.707106781186548");
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(0.0) == "0");
  CHECK(round15(0.1 + 0.2) == 0.3);
}

TEST_CASE("threshold command", "[cli]") {
  RunSpec s;
  s.command = Command::threshold;
  s.mode = Mode::path;
  CHECK(invoke(s).out == "0.707106781186548\n");
  s.mode = Mode::switch_;
  CHECK(invoke(s).out == "0.632455532033676\n");
  s.format = Format::json;
  const auto j = nlohmann::json::parse(invoke(s).out);
  CHECK(j["threshold"].get<double>() == round15(std::sqrt(0.4)));
  CHECK(j["mode"] == "switch");
  s.mode = Mode::bare;
  CHECK(invoke(s).code == exit_code::usage);
  s.mode = Mode::path;
  s.p = 2.0;
  const auto bad = invoke(s);
  CHECK(bad.code == exit_code::usage);
  CHECK(bad.err.find("error:") == 0);
}

TEST_CASE("evolve command", "[cli]") {
  RunSpec s;
  s.command = Command::evolve;
  s.mode = Mode::switch_;
  s.input = {1, 0, 0, 0};
  s.t = 10.0;
  const auto r = invoke(s);
  REQUIRE(r.code == exit_code::ok);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "t,rho00_re,rho00_im,rho01_re,rho01_im,rho10_re,rho10_im,rho11_re,rho11_im,probability");
  CHECK(rows[1].rfind("10,0.42857142", 0) == 0);

  s.mode = Mode::path;
  s.input.clear();
  s.a = 0.65;
  s.t = 0.0;
  s.format = Format::json;
  const auto j = nlohmann::json::parse(invoke(s).out);
  CHECK(j["rows"][0]["probability"].get<double>() == 0.5);
  CHECK(j["rows"][0]["rho"][0][0].get<double>() == round15(0.65 * 0.65));

  s.t.reset();
  s.points = 11;
  s.t_max = 2.0;
  s.format = Format::csv;
  CHECK(lines(invoke(s).out).size() == 12);

  s.input = {1, 0, 0};
  CHECK(invoke(s).code == exit_code::usage);
  s.input = {1, 0, 0, 1};
  CHECK(invoke(s).code == exit_code::usage);
}

TEST_CASE("post-selection failure maps to its exit code", "[cli]") {
  RunSpec s;
  s.command = Command::evolve;
  s.mode = Mode::switch_;
  s.outcome = Outcome::minus;
  s.input = {1, 0, 0, 0};
  s.t = 0.0;
  const auto r = invoke(s);
  CHECK(r.code == exit_code::postselection);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("distance command", "[cli]") {
  RunSpec s;
  s.command = Command::distance;
  s.a = 0.65;
  s.t = 0.0001;
  const auto rows = lines(invoke(s).out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "t,distance");
  s.t.reset();
  s.points = 30;
  CHECK(lines(invoke(s).out).size() == 31);
  s.a.reset();
  CHECK(invoke(s).code == exit_code::usage);
}

TEST_CASE("detect command", "[cli]") {
  const auto bare = invoke(detect_spec(Mode::bare, 0.65, 1.0));
  CHECK(bare.code == exit_code::ok);
  CHECK(bare.out.find("# verdict=false") != std::string::npos);

  const auto path = invoke(detect_spec(Mode::path, 0.65, 1.0));
  CHECK(path.code == exit_code::backflow);
  const auto rows = lines(path.out);
  CHECK(rows[0].rfind("# config=path a=0.65 p=1", 0) == 0);
  CHECK(rows[1].rfind("# verdict=true marginal=false persistent=true", 0) == 0);
  CHECK(rows[2].rfind("# intervals=1.49", 0) == 0);
  CHECK(rows[3] == "t,distance,dDdt,backflow");
  CHECK(rows.size() == 4 + kDefaultTimePoints);

  const auto sw = invoke(detect_spec(Mode::switch_, 0.65, 1.0));
  CHECK(sw.code == exit_code::ok);

  auto js = detect_spec(Mode::path, 0.65, 1.0);
  js.format = Format::json;
  const auto j = nlohmann::json::parse(invoke(js).out);
  CHECK(j["verdict"] == true);
  CHECK(j["intervals"].size() == 1);
  CHECK(j["rows"].size() == kDefaultTimePoints);
  for (const char* key : {"command", "mode", "a", "p", "eps", "marginal", "persistent", "max_dDdt"})
    CHECK(j.contains(key));

  CHECK(invoke(detect_spec(Mode::path, 1.5, 1.0)).code == exit_code::usage);
}

TEST_CASE("scan command", "[cli]") {
  RunSpec s;
  s.command = Command::scan;
  s.a_points = 50;
  s.p_points = 50;
  const auto r = invoke(s);
  REQUIRE(r.code == exit_code::ok);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 2501);
  CHECK(rows[0] == "a,p,path,switch");
  CHECK(rows[1] == "0.02,0,false,false");
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].find("false,true") == std::string::npos);

  s.a_values = {0.65, 0.9};
  s.p_values = {1.0};
  const auto cells = lines(invoke(s).out);
  REQUIRE(cells.size() == 3);
  CHECK(cells[1] == "0.65,1,true,false");
  CHECK(cells[2] == "0.9,1,false,false");

  s.a_values.clear();
  s.p_values.clear();
  s.a_points = 2000;
  s.p_points = 1000;
  CHECK(invoke(s).code == exit_code::usage);
}

TEST_CASE("validate command", "[cli]") {
  RunSpec s;
  s.command = Command::validate;
  const auto all = invoke(s);
  CHECK(all.code == exit_code::ok);
  CHECK(all.out.find(",FAIL") == std::string::npos);

  s.suite = "ode";
  s.t = 5.0;
  const auto ode = invoke(s);
  CHECK(ode.code == exit_code::ok);
  CHECK(lines(ode.out).size() > 1);

  s.suite = "cptp";
  s.t.reset();
  s.kraus_perturbation = 1e-3;
  const auto broken = invoke(s);
  CHECK(broken.code == exit_code::validation);
  CHECK(broken.out.find(",FAIL") != std::string::npos);

  s.suite = "nope";
  s.kraus_perturbation = 0.0;
  CHECK(invoke(s).code == exit_code::usage);
}

TEST_CASE("output is byte-stable across runs", "[cli]") {
  auto s = detect_spec(Mode::switch_, 0.4, 0.6);
  CHECK(invoke(s).out == invoke(s).out);
  s.format = Format::json;
  CHECK(invoke(s).out == invoke(s).out);
}

TEST_CASE("executable", "[cli][process]") {
  const auto threshold = shell("threshold --mode path --p 1");
  CHECK(threshold.code == 0);
  CHECK(threshold.out == "0.707106781186548\n");

  CHECK(shell("detect --mode path --a 0.65 --p 1").code == 1);
  CHECK(shell("detect --mode switch --a 0.65 --p 1").code == 0);
  CHECK(shell("detect --mode path").code == 2);
  CHECK(shell("threshold --mode sideways").code == 2);
  CHECK(shell("bogus").code == 2);
  CHECK(shell("evolve --mode switch --p 1 --outcome minus --input 1,0,0,0 --t 0").code == 3);
  CHECK(shell("validate --suite cptp --inject-perturbation 0.001").code == 4);
  const auto scan = shell("scan --a-values 0.65,0.9 --p-values 1 --format json");
  CHECK(scan.code == 0);
  const auto j = nlohmann::json::parse(scan.out);
  CHECK(j["cells"].size() == 2);
  CHECK(j["cells"][0]["path"] == true);
}
