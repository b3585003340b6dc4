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

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "obp/circuit.hpp"
#include "obp/pauli.hpp"

namespace obp {

enum class Norm { L1, L2 };

std::string_view norm_name(Norm norm);
Norm parse_norm(std::string_view name);

/// Returns g^dagger s g.
PauliSum conjugate_gate(const PauliSum& s, const Gate& g);

/// Returns U^dagger s U for the slice unitary U (last gate conjugated first).
PauliSum conjugate_slice(const PauliSum& s, const Slice& slice);

/// Contribution of one coefficient to a running removed-weight accumulator.
inline double weight_contribution(double coeff, Norm norm) {
  return norm == Norm::L1 ? (coeff < 0 ? -coeff : coeff) : coeff * coeff;
}

/// Norm represented by an accumulator of weight_contribution values.
double accumulated_norm(double accumulator, Norm norm);

/// |c| rounded to 40 significant bits, so that magnitudes which agree up to
/// floating-point noise sort as ties.
double truncation_magnitude(double coeff);

/// Truncation order: ascending truncation_magnitude, ties by ascending address.
bool truncation_before(const PauliTerm& a, const PauliTerm& b);

struct Truncation {
  PauliSum kept;
  std::vector<PauliTerm> removed;  ///< in truncation order
  double removed_weight = 0.0;     ///< norm of the removed coefficients
  double residual = 0.0;           ///< budget - removed_weight
};

/**
 * Removes terms in truncation order while the norm of everything removed
 * stays within `budget`. Throws std::invalid_argument for a negative budget.
 */
Truncation truncate(const PauliSum& s, double budget, Norm norm);

/// Sum |c| (L1) or sqrt(sum c^2) (L2).
double error_bound(std::span<const double> removed, Norm norm);
double error_bound(std::span<const PauliTerm> removed, Norm norm);

/**
 * Error budget split over the slices of a circuit plus an optional terminal
 * truncation pass after the last slice.
 */
struct BudgetSchedule {
  Norm norm = Norm::L2;
  std::vector<double> per_slice;
  double final_pass = 0.0;
  /// Unspent budget rolls into the next pass.
  bool carry_forward = true;

  double total() const;
  void validate(std::size_t num_slices) const;

  static BudgetSchedule zero(std::size_t num_slices, Norm norm = Norm::L2);
  static BudgetSchedule even(double total, std::size_t num_slices, Norm norm);
  /// Reserves `fraction` of the total for the terminal pass; the rest is split evenly.
  static BudgetSchedule final_heavy(double total, double fraction, std::size_t num_slices,
                                    Norm norm);
  /// `initial` split evenly over the slices, then `final_budget` for the terminal pass.
  static BudgetSchedule two_phase(double initial, double final_budget, std::size_t num_slices,
                                  Norm norm);
};

/// Hands out per-pass budgets, carrying unspent residue forward.
class BudgetTracker {
 public:
  explicit BudgetTracker(const BudgetSchedule& schedule) : schedule_(schedule) {}

  double slice_budget(std::size_t slice) const;
  double final_budget() const;
  void record(double available, double removed_weight);

 private:
  const BudgetSchedule& schedule_;
  double carry_ = 0.0;
};

struct EngineLimits {
  std::optional<std::size_t> max_terms;
  std::optional<double> max_seconds;

  void validate() const;
};

enum class Termination { Completed, TermLimit, TimeLimit };

std::string_view termination_name(Termination t);

struct PassStats {
  std::size_t terms_before = 0;
  std::size_t terms_after = 0;
  double budget = 0.0;            ///< available for this pass, including carried residue
  double truncated_weight = 0.0;  ///< in the schedule's norm
  double truncated_l1 = 0.0;
  double truncated_l2 = 0.0;
  double accrued_after = 0.0;     ///< running sum of truncated_weight
};

struct BackpropResult {
  PauliSum op;
  /// Sum of per-pass truncated weights in the schedule's norm (triangle inequality).
  double accrued_error = 0.0;
  double accrued_l1 = 0.0;
  double accrued_l2 = 0.0;
  std::vector<PassStats> per_slice;
  std::optional<PassStats> final_pass;
  std::size_t slices_completed = 0;
  Termination termination = Termination::Completed;
};

/**
 * Backpropagates `observable` through `circuit` from the last slice to the
 * first, truncating after each slice, and applies the terminal pass when the
 * run completes. Time limits are checked at slice boundaries; term limits
 * after each truncation.
 */
BackpropResult backpropagate(const PauliSum& observable, const Circuit& circuit,
                             const BudgetSchedule& budget, const EngineLimits& limits = {});

}  // namespace obp
