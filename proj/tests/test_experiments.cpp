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

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "obp/experiments.hpp"
#include "support.hpp"

namespace obp {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("obp_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(OBP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, Validation) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  c.budget = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.lattice = "torus";
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.ordering = "random";
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.budget_policy = "greedy";
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.max_terms = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, Observables) {
  RunConfig c;
  c.observable = "Z0 X3";
  auto obs = build_observables(c, 4);
  ASSERT_EQ(obs.size(), 1u);
  EXPECT_EQ(obs[0].coeff(PauliKey::from_string("ZIIX")), 1.0);
  c.observable = "mean:Z";
  obs = build_observables(c, 4);
  EXPECT_EQ(obs[0].size(), 4u);
  EXPECT_EQ(obs[0].coeff(PauliKey::from_string("IIZI")), 0.25);
  c.observable = "each:X";
  obs = build_observables(c, 3);
  ASSERT_EQ(obs.size(), 3u);
  EXPECT_EQ(obs[2].coeff(PauliKey::from_string("IIX")), 1.0);
  for (const char* bad : {"Z9", "Q1", "Z0 Z0", "Z", "sum:W"}) {
    c.observable = bad;
    EXPECT_THROW(build_observables(c, 4), ConfigError) << bad;
  }
}

TEST(Config, BudgetPolicies) {
  RunConfig c;
  c.budget = 1.0;
  auto b = build_budget(c, 4);
  ASSERT_EQ(b.per_slice.size(), 4u);
  EXPECT_DOUBLE_EQ(b.per_slice[0], 0.25);
  EXPECT_EQ(b.final_pass, 0.0);
  c.budget_policy = "final-heavy=0.9";
  b = build_budget(c, 4);
  EXPECT_NEAR(b.final_pass, 0.9, 1e-15);
  EXPECT_NEAR(b.per_slice[3], 0.025, 1e-15);
  c.budget_policy = "explicit=0.1,0.2,0.3";
  b = build_budget(c, 2);
  EXPECT_EQ(b.per_slice[1], 0.2);
  EXPECT_EQ(b.final_pass, 0.3);
  EXPECT_THROW(build_budget(c, 3), ConfigError);
  c.budget_policy = "final-heavy=1.5";
  EXPECT_THROW(build_budget(c, 3), ConfigError);
}

TEST(Helpers, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Helpers, LogLogSlope) {
  const std::vector<double> x{0.01, 0.02, 0.05, 0.1};
  std::vector<double> y;
  for (double t : x) y.push_back(3.0 * t * t);
  EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-12);
}

TEST(Helpers, ExcitationSites) {
  EXPECT_EQ(excitation_sites(12, 3), (std::vector<std::size_t>{2, 6, 10}));
  EXPECT_EQ(excitation_sites(4, 1), (std::vector<std::size_t>{2}));
}

TEST(BoundSweep, ExactErrorBelowL1) {
  test::Rng rng(12);
  const PauliSum op = test::random_sum(rng, 5, 40);
  const DenseState psi = test::random_state(rng, 5);
  const auto rows = bound_sweep(op, psi, true);
  ASSERT_EQ(rows.size(), op.size() + 1);
  EXPECT_EQ(rows.front().exact_error, 0.0);
  for (const auto& r : rows) {
    EXPECT_LE(r.exact_error, r.spectral_norm + 1e-12);
    EXPECT_LE(r.spectral_norm, r.l1_bound + 1e-12);
    EXPECT_EQ(r.kept + r.level, op.size());
  }
}

TEST(SplitDemo, EstimatesStayWithinBound) {
  SplitDemoParams p;
  p.n = 6;
  p.backprop_steps = 2;
  p.excitations = 2;
  const auto rows = split_demo(p, 2, 5);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.within_bound) << r.steps;
    EXPECT_NEAR(r.reference, 2.0 / 6.0, 1e-12);
  }
  p.initial_budget = p.final_budget = 0.0;
  for (const auto& r : split_demo(p, 3, 3)) EXPECT_LT(r.max_site_error, 1e-12);
  EXPECT_THROW(split_demo(p, 1, 3), std::invalid_argument);
}

TEST(Cli, ExitCodes) {
  const fs::path d = scratch("exit");
  EXPECT_EQ(run_cli("backprop --qubits 4 --steps 2 --out " + d.string()), 0);
  EXPECT_EQ(run_cli("backprop --qubits 4 --budget -1 --out " + d.string()), 2);
  EXPECT_EQ(run_cli("backprop --lattice torus --out " + d.string()), 2);
  EXPECT_EQ(run_cli("backprop --observable Z40 --qubits 4 --out " + d.string()), 2);
  EXPECT_EQ(run_cli("--no-such-flag"), 2);
  EXPECT_EQ(run_cli("backprop --qubits 12 --steps 8 --max-terms 5 --out " + d.string()), 3);
  EXPECT_EQ(run_cli("--version"), 0);
}

TEST(Cli, RerunsAreByteIdentical) {
  const fs::path a = scratch("rerun_a");
  const fs::path b = scratch("rerun_b");
  const std::string args = "backprop --qubits 8 --steps 3 --budget 0.01 --observable mean:Z --out ";
  ASSERT_EQ(run_cli(args + a.string()), 0);
  ASSERT_EQ(run_cli(args + b.string()), 0);
  for (const char* f : {"observable.json", "stats.csv", "groups.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Cli, SingleNodeDistributedMatchesBackprop) {
  const fs::path a = scratch("r1_a");
  const fs::path b = scratch("r1_b");
  const std::string common = " --qubits 8 --steps 3 --budget 0.02 --budget-policy final-heavy=0.5 --out ";
  ASSERT_EQ(run_cli("backprop" + common + a.string()), 0);
  ASSERT_EQ(run_cli("distributed --nodes 1" + common + b.string()), 0);
  for (const char* f : {"observable.json", "stats.csv", "groups.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const fs::path c = scratch("r4");
  ASSERT_EQ(run_cli("distributed --nodes 4 --transport socket" + common + c.string()), 0);
  EXPECT_TRUE(fs::exists(c / "message_log.jsonl"));
  const auto info = nlohmann::json::parse(slurp(c / "distributed.json"));
  EXPECT_EQ(info["nodes"], 4);
  EXPECT_EQ(info["transport"], "socket");
}

TEST(Cli, EmptyCircuitReturnsObservable) {
  const fs::path d = scratch("empty");
  ASSERT_EQ(run_cli("backprop --qubits 5 --steps 0 --observable \"X1 Y2\" --out " + d.string()), 0);
  const auto j = nlohmann::json::parse(slurp(d / "observable.json"));
  const PauliSum s = observable_from_json(j["observable"]);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.coeff(PauliKey::from_string("IXYII")), 1.0);
}

TEST(Cli, CsvPreambleCarriesConfig) {
  const fs::path d = scratch("csv");
  ASSERT_EQ(run_cli("backprop --qubits 4 --steps 1 --tau 0.25 --out " + d.string()), 0);
  const std::string csv = slurp(d / "stats.csv");
  ASSERT_EQ(csv.rfind("# ", 0), 0u);
  const auto header = nlohmann::json::parse(csv.substr(2, csv.find('\n') - 2));
  EXPECT_EQ(header["config"]["tau"], 0.25);
  EXPECT_NE(csv.find("pass,slice,terms_before,terms_after"), std::string::npos);
}

TEST(Cli, SynthAndGroup) {
  const fs::path d = scratch("synth");
  ASSERT_EQ(run_cli("synth --qubits 6 --steps 2 --out " + d.string()), 0);
  const fs::path circ = d / "circuit.json";
  ASSERT_TRUE(fs::exists(circ));
  const fs::path e = scratch("synth_bp");
  ASSERT_EQ(run_cli("backprop --circuit " + circ.string() + " --out " + e.string()), 0);
  const fs::path g = scratch("group");
  ASSERT_EQ(run_cli("group --observable " + (e / "observable.json").string() + " --out " +
                    g.string()),
            0);
  EXPECT_EQ(slurp(e / "groups.json").find("\"groups\"") != std::string::npos, true);
  EXPECT_TRUE(fs::exists(g / "groups.json"));
}

}  // namespace
}  // namespace obp
