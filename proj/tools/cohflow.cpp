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

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cohflow/cli.hpp"

namespace {

using cohflow::Mode;
using cohflow::Outcome;
using cohflow::cli::Command;
using cohflow::cli::Format;
using cohflow::cli::RunSpec;

const std::map<std::string, Mode> kModes{
    {"bare", Mode::bare}, {"path", Mode::path}, {"switch", Mode::switch_}};
const std::map<std::string, Outcome> kOutcomes{{"plus", Outcome::plus}, {"minus", Outcome::minus}};
const std::map<std::string, Format> kFormats{{"csv", Format::csv}, {"json", Format::json}};

struct RawFlags {
  std::string mode = "bare";
  std::string outcome = "plus";
  std::string format = "csv";
  std::string out_path;
};

template <typename Map>
CLI::IsMember keys_of(const Map& map) {
  std::vector<std::string> keys;
  for (const auto& [k, v] : map) keys.push_back(k);
  return CLI::IsMember(keys, CLI::ignore_case);
}

void add_common(CLI::App* sub, RunSpec&, RawFlags& raw) {
  sub->add_option("--format", raw.format, "csv | json")->check(keys_of(kFormats));
  sub->add_option("--out", raw.out_path, "Output file (default: stdout)");
}

void add_mode(CLI::App* sub, RunSpec& spec, RawFlags& raw) {
  sub->add_option("--mode", raw.mode, "bare | path | switch")->check(keys_of(kModes));
  sub->add_option("--p", spec.p, "Control coherence p in [0, 1]");
  sub->add_option("--outcome", raw.outcome, "Post-selected control outcome: plus | minus")
      ->check(keys_of(kOutcomes));
}

void add_time_grid(CLI::App* sub, RunSpec& spec) {
  sub->add_option("--t", spec.t, "Single evaluation time");
  sub->add_option("--t-min", spec.t_min, "First time of the logarithmic grid");
  sub->add_option("--t-max", spec.t_max, "Last time of the grid");
  sub->add_option("--points", spec.points, "Number of grid points");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherently controlled non-Markovian qubit dynamics and information backflow"};
  app.require_subcommand(1);
  RunSpec spec;
  RawFlags raw;

  auto* evolve = app.add_subcommand("evolve", "Evolve a qubit state and print its entries");
  add_mode(evolve, spec, raw);
  add_time_grid(evolve, spec);
  evolve->add_option("--a", spec.a, "Input |psi> = a|0> + sqrt(1-a^2)|1>");
  evolve->add_option("--input", spec.input, "Input density matrix, row-major (4 reals or 8 re,im)")
      ->delimiter(',');
  add_common(evolve, spec, raw);

  auto* distance = app.add_subcommand("distance", "Trace distance of the probe pair over time");
  add_mode(distance, spec, raw);
  add_time_grid(distance, spec);
  distance->add_option("--a", spec.a, "Probe parameter a in (0, 1]")->required();
  add_common(distance, spec, raw);

  auto* detect = app.add_subcommand("detect", "Detect information backflow for the probe pair");
  add_mode(detect, spec, raw);
  add_time_grid(detect, spec);
  detect->add_option("--a", spec.a, "Probe parameter a in (0, 1]")->required();
  detect->add_option("--eps", spec.eps, "Backflow tolerance on dD/dt");
  add_common(detect, spec, raw);

  auto* threshold = app.add_subcommand("threshold", "Asymptotic critical a for backflow");
  threshold->add_option("--mode", raw.mode, "path | switch")->check(keys_of(kModes))->required();
  threshold->add_option("--p", spec.p, "Control coherence p in [0, 1]");
  add_common(threshold, spec, raw);

  auto* scan = app.add_subcommand("scan", "Backflow region over an (a, p) grid");
  scan->add_option("--a-points", spec.a_points, "a grid: i/N for i = 1..N");
  scan->add_option("--p-points", spec.p_points, "p grid: j/(M-1) for j = 0..M-1");
  scan->add_option("--a-values", spec.a_values, "Explicit a values")->delimiter(',');
  scan->add_option("--p-values", spec.p_values, "Explicit p values")->delimiter(',');
  scan->add_option("--t-min", spec.t_min, "First time of the logarithmic grid");
  scan->add_option("--t-max", spec.t_max, "Last time of the logarithmic grid");
  scan->add_option("--points", spec.points, "Number of time points");
  scan->add_option("--eps", spec.eps, "Backflow tolerance on dD/dt");
  add_common(scan, spec, raw);

  auto* validate = app.add_subcommand("validate", "Run the self-check suites");
  validate->add_option("--suite", spec.suite, "all | cptp | ode | closed-form | derivative | reduction");
  validate->add_option("--t", spec.t, "Time for the ode suite");
  validate->add_option("--inject-perturbation", spec.kraus_perturbation,
                       "Scale K3 of phi_t by (1 + x) in the cptp suite")
      ->group("");
  add_common(validate, spec, raw);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cohflow::cli::exit_code::usage;
  }

  if (*evolve) spec.command = Command::evolve;
  if (*distance) spec.command = Command::distance;
  if (*detect) spec.command = Command::detect;
  if (*threshold) spec.command = Command::threshold;
  if (*scan) spec.command = Command::scan;
  if (*validate) spec.command = Command::validate;

  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  spec.mode = kModes.at(lower(raw.mode));
  spec.outcome = kOutcomes.at(lower(raw.outcome));
  spec.format = kFormats.at(lower(raw.format));

  if (const char* env = std::getenv("COHFLOW_THREADS")) spec.threads = std::atoi(env);

  if (raw.out_path.empty()) return cohflow::cli::run(spec, std::cout, std::cerr);
  std::ofstream file(raw.out_path);
  if (!file) {
    std::cerr << "error: cannot open " << raw.out_path << '\n';
    return cohflow::cli::exit_code::usage;
  }
  return cohflow::cli::run(spec, file, std::cerr);
}
