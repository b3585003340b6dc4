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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "obp/backprop.hpp"
#include "obp/circuit.hpp"
#include "obp/distributed.hpp"
#include "obp/grouping.hpp"
#include "obp/io.hpp"
#include "obp/oracle.hpp"
#include "obp/pauli.hpp"

namespace obp {

std::string_view engine_version();

/// Invalid user input; the CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Parameters shared by every subcommand. to_json() covers only what shapes
 * the computed result, so the same run through different front ends embeds
 * the same record.
 */
struct RunConfig {
  std::optional<std::string> circuit_path;
  std::string lattice = "chain";  ///< chain, chain-closed, heavyhex
  std::size_t qubits = 12;
  int steps = 5;
  double tau = 0.1;
  double J = 1.0;
  double h = 0.0;
  std::string ordering = "symmetric";

  /// "Z0 X3" (one term), "sum:Z", "mean:Z", "each:Z", or a JSON file path.
  std::string observable = "Z0";

  double budget = 0.0;
  std::string budget_policy = "even";  ///< even, final-heavy=F, explicit=b0,...,bS-1,final
  Norm norm = Norm::L2;
  std::optional<std::size_t> max_terms;
  std::optional<double> max_seconds;
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
  /// Throws ConfigError.
  void validate() const;
};

Lattice build_lattice(const RunConfig& cfg);
Circuit build_circuit(const RunConfig& cfg);
BudgetSchedule build_budget(const RunConfig& cfg, std::size_t num_slices);

/// One sum for plain specs; one per site for "each:<P>".
std::vector<PauliSum> build_observables(const RunConfig& cfg, std::size_t n);
bool per_site_observable(const RunConfig& cfg);

/// Shortest round-trip decimal form, independent of locale.
std::string format_double(double v);

/// Single observable run plus the data written by the backprop subcommand.
struct BackpropReport {
  BackpropResult result;
  std::vector<MeasurementGroup> groups;
};

BackpropReport run_backprop(const RunConfig& cfg, const Circuit& circuit,
                            const PauliSum& observable);

/// Stats CSV: one row per pass (slices in backprop order, then the final pass).
std::string pass_stats_csv(const BackpropResult& r, std::size_t num_slices,
                           const nlohmann::json& header);

/// Output document: {"config", "engine_version", ...payload}.
nlohmann::json envelope(const RunConfig& cfg, nlohmann::json payload);

// ---------------------------------------------------------------------------
// Per-site observables backpropagated one at a time

struct SiteSummary {
  std::size_t backprop_steps = 0;
  double initial_budget = 0.0;
  double final_budget = 0.0;
  std::size_t unique_initial = 0;
  std::size_t unique_final = 0;
  double mean_initial = 0.0;
  double mean_final = 0.0;
  double median_initial = 0.0;
  double median_final = 0.0;
  std::size_t groups = 0;
  double initial_seconds = 0.0;
  double final_seconds = 0.0;
  std::vector<PauliSum> finals;
  std::vector<double> accrued_l2;  ///< initial plus final truncation per site
};

/**
 * Backpropagates each observable with `initial` split evenly over the slices,
 * then truncates the result once more with a separate `final_budget`.
 */
SiteSummary per_site_backprop(const Circuit& circuit, std::span<const PauliSum> observables,
                              double initial, double final_budget, Norm norm,
                              std::size_t backprop_steps);

nlohmann::json site_summary_json(const SiteSummary& s);

// ---------------------------------------------------------------------------
// Error bounds vs exact error

struct BoundRow {
  std::size_t level = 0;  ///< number of smallest terms removed
  std::size_t kept = 0;
  double exact_error = 0.0;    ///< |<psi|Delta|psi>|
  double spectral_norm = 0.0;  ///< ||Delta||
  double l1_bound = 0.0;
  double l2_estimate = 0.0;
};

/// Removes the `level` smallest terms of `op` in truncation order for every level 0..|op|.
std::vector<BoundRow> bound_sweep(const PauliSum& op, const DenseState& state, bool spectral);

std::string bound_rows_csv(const std::vector<BoundRow>& rows, const nlohmann::json& header);

// ---------------------------------------------------------------------------
// Localization

struct LocalizationRow {
  double tau = 0.0;
  double mu = 0.0;
  double delta = 0.0;
};

struct LocalizationSweep {
  std::vector<LocalizationRow> rows;
  /// Log-log slope of Delta vs tau per mu value, rows with mu tau < 1 and tau > 0.
  std::vector<std::pair<double, double>> slopes;
  double collapse_spread_2j = 0.0;  ///< max/min of Delta (mu-2J)^2/tau^2 over the stable rows
  double collapse_spread_1j = 0.0;  ///< same with (mu-J)^2
};

LocalizationSweep localization_sweep(const std::vector<double>& taus,
                                     const std::vector<double>& mus,
                                     const LocalizationParams& base);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// End-to-end split demo

struct SplitRow {
  int steps = 0;
  int backprop_steps = 0;
  double estimate = 0.0;   ///< mean over sites of the reconstructed <Z_i>
  double reference = 0.0;  ///< mean over sites from the full dense circuit
  double max_site_error = 0.0;
  double max_site_bound = 0.0;  ///< accrued L1 bound of that site
  bool within_bound = true;     ///< every site inside its own L1 bound
  std::size_t unique_paulis = 0;
  std::size_t groups = 0;
};

struct SplitDemoParams {
  std::size_t n = 12;
  double tau = 0.1;
  int backprop_steps = 5;
  double initial_budget = 0.001;
  double final_budget = 0.009;
  std::size_t excitations = 3;
};

/// Evenly spaced excitation sites, positions round((i + 1/2) n / e - 1/2).
std::vector<std::size_t> excitation_sites(std::size_t n, std::size_t count);

/// States prepared with X on the excitation sites; closed chain, repeated ordering so the
/// k-step circuit is the (k - b)-step circuit followed by the b-step one.
std::vector<SplitRow> split_demo(const SplitDemoParams& p, int first_k, int last_k);

// ---------------------------------------------------------------------------
// Subcommands. Each writes into `out` and returns the exit code.

struct DistributedConfig {
  std::size_t nodes = 1;
  Transport transport = Transport::InProcess;
  std::size_t threads = 0;
};

int cmd_backprop(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_distributed(const RunConfig& cfg, const DistributedConfig& dist,
                    const std::filesystem::path& out);
int cmd_synth(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_bench_bounds(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_localization(const RunConfig& cfg, const std::vector<double>& taus,
                     const std::vector<double>& mus, const std::filesystem::path& out);
int cmd_group(const RunConfig& cfg, const std::filesystem::path& out);

}  // namespace obp
