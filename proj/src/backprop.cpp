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

#include "obp/backprop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace obp {

std::string_view norm_name(Norm norm) { return norm == Norm::L1 ? "l1" : "l2"; }

Norm parse_norm(std::string_view name) {
  if (name == "l1" || name == "L1") return Norm::L1;
  if (name == "l2" || name == "L2") return Norm::L2;
  throw std::invalid_argument("unknown norm '" + std::string(name) + "'");
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::TermLimit: return "term_limit";
    case Termination::TimeLimit: return "time_limit";
  }
  return "completed";
}

namespace {

// Applies a Clifford g^dagger P g to `key` in place; returns the sign.
double conjugate_clifford(GateKind kind, std::span<const std::size_t> qubits, PauliKey& key) {
  const std::size_t q = qubits[0];
  const bool z = key.z(q), x = key.x(q);
  switch (kind) {
    case GateKind::H:  // X <-> Z, Y -> -Y
      key.set(q, x, z);
      return z && x ? -1.0 : 1.0;
    case GateKind::S:  // X -> -Y, Y -> X
      key.set(q, z ^ x, x);
      return x && !z ? -1.0 : 1.0;
    case GateKind::Sdg:  // X -> Y, Y -> -X
      key.set(q, z ^ x, x);
      return x && z ? -1.0 : 1.0;
    case GateKind::X:
      return z ? -1.0 : 1.0;
    case GateKind::Y:
      return z != x ? -1.0 : 1.0;
    case GateKind::Z:
      return x ? -1.0 : 1.0;
    case GateKind::CX: {
      const std::size_t t = qubits[1];
      const bool zt = key.z(t), xt = key.x(t);
      // X_c -> X_c X_t, Z_t -> Z_c Z_t.
      const bool flip = x && zt && !(xt ^ z);
      key.set(q, z ^ zt, x);
      key.set(t, zt, xt ^ x);
      return flip ? -1.0 : 1.0;
    }
    case GateKind::PauliRotation:
      break;
  }
  throw std::logic_error("conjugate_clifford called on a rotation");
}

void check_gate(const PauliSum& s, const Gate& g) {
  for (std::size_t q : g.qubits) {
    if (q >= s.num_qubits()) {
      throw std::out_of_range("gate qubit " + std::to_string(q) + " outside a " +
                              std::to_string(s.num_qubits()) + "-qubit operator");
    }
  }
  g.validate(s.num_qubits());
}

}  // namespace

PauliSum conjugate_gate(const PauliSum& s, const Gate& g) {
  check_gate(s, g);
  PauliSum out(s.num_qubits());
  out.reserve(s.size());
  if (g.is_clifford()) {
    for (const auto& [key, c] : s) {
      PauliKey k = key;
      const double sign = conjugate_clifford(g.kind, g.qubits, k);
      out.insert_new(std::move(k), sign * c);
    }
    return out;
  }

  const PauliKey& gen = *g.generator;
  const double cs = std::cos(g.angle);
  const double sn = std::sin(g.angle);
  // Each output key receives at most two contributions (itself and its partner
  // G*P), so the result does not depend on iteration order.
  for (const auto& [key, c] : s) {
    if (commutes(key, gen)) {
      out.add(key, c);
      continue;
    }
    out.add(key, cs * c);
    const PauliProduct gp = multiply(gen, key);
    // i * G * P = i^(phase+1) Q, which is real for anticommuting G and P.
    const int phase = (gp.phase + 1) % 4;
    if (phase % 2 != 0) throw std::logic_error("non-Hermitian term from rotation conjugation");
    out.add(gp.key, (phase == 0 ? 1.0 : -1.0) * sn * c);
  }
  return out;
}

PauliSum conjugate_slice(const PauliSum& s, const Slice& slice) {
  PauliSum cur = s;
  for (auto it = slice.gates.rbegin(); it != slice.gates.rend(); ++it) {
    cur = conjugate_gate(cur, *it);
  }
  return cur;
}

double accumulated_norm(double accumulator, Norm norm) {
  return norm == Norm::L1 ? accumulator : std::sqrt(accumulator);
}

double truncation_magnitude(double coeff) {
  int e = 0;
  const double f = std::frexp(std::abs(coeff), &e);
  return std::ldexp(std::round(std::ldexp(f, 40)), e - 40);
}

bool truncation_before(const PauliTerm& a, const PauliTerm& b) {
  const double ma = truncation_magnitude(a.coeff), mb = truncation_magnitude(b.coeff);
  if (ma != mb) return ma < mb;
  return a.key < b.key;
}

Truncation truncate(const PauliSum& s, double budget, Norm norm) {
  if (!(budget >= 0.0)) throw std::invalid_argument("truncation budget must be non-negative");
  Truncation out{PauliSum(s.num_qubits()), {}, 0.0, budget};
  if (budget == 0.0) {
    out.kept = s;
    return out;
  }
  std::vector<PauliTerm> terms;
  terms.reserve(s.size());
  for (const auto& [k, c] : s) terms.push_back({k, c});
  std::sort(terms.begin(), terms.end(), truncation_before);

  double acc = 0.0;
  std::size_t cut = 0;
  for (; cut < terms.size(); ++cut) {
    const double next = acc + weight_contribution(terms[cut].coeff, norm);
    if (accumulated_norm(next, norm) > budget) break;
    acc = next;
  }
  out.removed.assign(terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(cut));
  out.kept.reserve(terms.size() - cut);
  for (std::size_t i = cut; i < terms.size(); ++i) {
    out.kept.insert_new(std::move(terms[i].key), terms[i].coeff);
  }
  out.removed_weight = accumulated_norm(acc, norm);
  out.residual = budget - out.removed_weight;
  return out;
}

double error_bound(std::span<const double> removed, Norm norm) {
  double acc = 0.0;
  for (double c : removed) acc += weight_contribution(c, norm);
  return accumulated_norm(acc, norm);
}

double error_bound(std::span<const PauliTerm> removed, Norm norm) {
  double acc = 0.0;
  for (const auto& t : removed) acc += weight_contribution(t.coeff, norm);
  return accumulated_norm(acc, norm);
}

// ---------------------------------------------------------------------------
// Budgets

double BudgetSchedule::total() const {
  return std::accumulate(per_slice.begin(), per_slice.end(), 0.0) + final_pass;
}

void BudgetSchedule::validate(std::size_t num_slices) const {
  if (per_slice.size() != num_slices) {
    throw std::invalid_argument("budget schedule has " + std::to_string(per_slice.size()) +
                                " entries for " + std::to_string(num_slices) + " slices");
  }
  for (double b : per_slice) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("invalid per-slice budget");
  }
  if (!(final_pass >= 0.0) || !std::isfinite(final_pass)) {
    throw std::invalid_argument("invalid final-pass budget");
  }
}

BudgetSchedule BudgetSchedule::zero(std::size_t num_slices, Norm norm) {
  return {norm, std::vector<double>(num_slices, 0.0), 0.0, true};
}

BudgetSchedule BudgetSchedule::even(double total, std::size_t num_slices, Norm norm) {
  return two_phase(total, 0.0, num_slices, norm);
}

BudgetSchedule BudgetSchedule::final_heavy(double total, double fraction, std::size_t num_slices,
                                           Norm norm) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("final-heavy fraction must lie in [0, 1]");
  }
  return two_phase(total * (1.0 - fraction), total * fraction, num_slices, norm);
}

BudgetSchedule BudgetSchedule::two_phase(double initial, double final_budget,
                                         std::size_t num_slices, Norm norm) {
  if (!(initial >= 0.0) || !(final_budget >= 0.0)) {
    throw std::invalid_argument("budgets must be non-negative");
  }
  BudgetSchedule s{norm, std::vector<double>(num_slices, 0.0), final_budget, true};
  if (num_slices == 0) {
    s.final_pass += initial;
  } else {
    std::fill(s.per_slice.begin(), s.per_slice.end(), initial / static_cast<double>(num_slices));
  }
  return s;
}

double BudgetTracker::slice_budget(std::size_t slice) const {
  return schedule_.per_slice.at(slice) + carry_;
}

double BudgetTracker::final_budget() const { return schedule_.final_pass + carry_; }

void BudgetTracker::record(double available, double removed_weight) {
  carry_ = schedule_.carry_forward ? std::max(0.0, available - removed_weight) : 0.0;
}

void EngineLimits::validate() const {
  if (max_terms && *max_terms == 0) throw std::invalid_argument("max_terms must be positive");
  if (max_seconds && !(*max_seconds > 0.0)) {
    throw std::invalid_argument("max_seconds must be positive");
  }
}

// ---------------------------------------------------------------------------
// Engine

BackpropResult backpropagate(const PauliSum& observable, const Circuit& circuit,
                             const BudgetSchedule& budget, const EngineLimits& limits) {
  if (observable.num_qubits() != circuit.num_qubits()) {
    throw std::invalid_argument("observable has " + std::to_string(observable.num_qubits()) +
                                " qubits but the circuit has " +
                                std::to_string(circuit.num_qubits()));
  }
  budget.validate(circuit.num_slices());
  limits.validate();

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  BackpropResult result;
  result.op = observable;
  BudgetTracker tracker(budget);

  auto run_pass = [&](double available) {
    PassStats st;
    st.terms_before = result.op.size();
    st.budget = available;
    Truncation tr = truncate(result.op, available, budget.norm);
    st.truncated_weight = tr.removed_weight;
    st.truncated_l1 = error_bound(tr.removed, Norm::L1);
    st.truncated_l2 = error_bound(tr.removed, Norm::L2);
    result.op = std::move(tr.kept);
    st.terms_after = result.op.size();
    result.accrued_error += st.truncated_weight;
    result.accrued_l1 += st.truncated_l1;
    result.accrued_l2 += st.truncated_l2;
    st.accrued_after = result.accrued_error;
    tracker.record(available, st.truncated_weight);
    return st;
  };

  const auto& slices = circuit.slices();
  for (std::size_t i = 0; i < slices.size(); ++i) {
    if (limits.max_seconds && elapsed() > *limits.max_seconds) {
      result.termination = Termination::TimeLimit;
      return result;
    }
    const std::size_t s = slices.size() - 1 - i;
    result.op = conjugate_slice(result.op, slices[s]);
    result.per_slice.push_back(run_pass(tracker.slice_budget(s)));
    ++result.slices_completed;
    if (limits.max_terms && result.op.size() > *limits.max_terms) {
      result.termination = Termination::TermLimit;
      return result;
    }
  }
  result.final_pass = run_pass(tracker.final_budget());
  return result;
}

}  // namespace obp
