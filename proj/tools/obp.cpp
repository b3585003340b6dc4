// Copyright 2026 The OBP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: backprop, synth, bench-bounds, localization,
// distributed, group.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "obp/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;

struct Flags {
  obp::RunConfig cfg;
  std::string circuit;
  std::string norm = "l2";
  std::string out = "out";
  std::size_t nodes = 1;
  std::string transport = "inproc";
  std::size_t threads = 0;
  std::size_t max_terms = 0;
  double max_seconds = 0.0;
  std::vector<double> taus{0.01, 0.015, 0.02, 0.03, 0.05, 0.07, 0.1};
  std::vector<double> mus{4.0, 6.0, 8.0};
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--circuit", f.circuit, "circuit JSON (overrides synthesis flags)");
  app->add_option("--lattice", f.cfg.lattice, "chain, chain-closed or heavyhex")
      ->check(CLI::IsMember({"chain", "chain-closed", "heavyhex"}));
  app->add_option("--qubits", f.cfg.qubits, "chain length");
  app->add_option("--steps", f.cfg.steps, "Trotter steps");
  app->add_option("--tau", f.cfg.tau, "Trotter step size");
  app->add_option("--J", f.cfg.J, "coupling");
  app->add_option("--mu,--field", f.cfg.h, "field strength");
  app->add_option("--ordering", f.cfg.ordering, "symmetric, xx_then_yy or repeated");
  app->add_option("--observable", f.cfg.observable,
                  "\"Z0 X3\", sum:Z, mean:Z, each:Z or a JSON file");
  app->add_option("--budget", f.cfg.budget, "total truncation budget");
  app->add_option("--budget-policy", f.cfg.budget_policy,
                  "even, final-heavy=F or explicit=b0,...,final");
  app->add_option("--norm", f.norm, "l1 or l2")->check(CLI::IsMember({"l1", "l2"}));
  app->add_option("--max-terms", f.max_terms, "stop once the operator exceeds this size");
  app->add_option("--max-seconds", f.max_seconds, "stop at the next slice after this long");
  app->add_option("--seed", f.cfg.seed, "seed recorded with the run");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--threads", f.threads, "worker threads, 0 for one per node");
}

obp::RunConfig finish(Flags& f) {
  obp::RunConfig cfg = f.cfg;
  if (!f.circuit.empty()) cfg.circuit_path = f.circuit;
  cfg.norm = obp::parse_norm(f.norm);
  if (f.max_terms > 0) cfg.max_terms = f.max_terms;
  if (f.max_seconds > 0) cfg.max_seconds = f.max_seconds;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator backpropagation toolkit"};
  app.set_version_flag("--version", std::string(obp::engine_version()));
  app.require_subcommand(1);
  Flags f;

  auto* backprop = app.add_subcommand("backprop", "backpropagate an observable");
  auto* synth = app.add_subcommand("synth", "synthesize an XY Trotter circuit");
  auto* bounds = app.add_subcommand("bench-bounds", "truncation error vs L1/L2 bounds");
  auto* loc = app.add_subcommand("localization", "long-time polarization deviation sweep");
  auto* dist = app.add_subcommand("distributed", "backprop on a simulated cluster");
  auto* group = app.add_subcommand("group", "qubit-wise commuting groups of an observable file");
  for (auto* s : {backprop, synth, bounds, loc, dist, group}) add_common(s, f);
  dist->add_option("--nodes", f.nodes, "node count");
  dist->add_option("--transport", f.transport, "inproc or socket")
      ->check(CLI::IsMember({"inproc", "socket"}));
  loc->add_option("--taus", f.taus, "tau grid")->delimiter(',');
  loc->add_option("--mus", f.mus, "mu grid")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const obp::RunConfig cfg = finish(f);
    const std::filesystem::path out = f.out;
    if (*backprop) return obp::cmd_backprop(cfg, out);
    if (*synth) return obp::cmd_synth(cfg, out);
    if (*bounds) return obp::cmd_bench_bounds(cfg, out);
    if (*loc) return obp::cmd_localization(cfg, f.taus, f.mus, out);
    if (*group) return obp::cmd_group(cfg, out);
    obp::DistributedConfig d{f.nodes, obp::parse_transport(f.transport), f.threads};
    return obp::cmd_distributed(cfg, d, out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
