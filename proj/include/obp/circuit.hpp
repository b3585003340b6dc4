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
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "obp/pauli.hpp"

namespace obp {

enum class GateKind { H, S, Sdg, X, Y, Z, CX, PauliRotation };

std::string_view gate_kind_name(GateKind kind);
GateKind parse_gate_kind(std::string_view name);

/**
 * A Clifford primitive or a Pauli-generator rotation exp(-i * angle/2 * G).
 *
 * For rotations `qubits` is the support of the generator. CX lists
 * (control, target).
 */
struct Gate {
  GateKind kind = GateKind::H;
  std::vector<std::size_t> qubits;
  double angle = 0.0;
  std::optional<PauliKey> generator;

  static Gate clifford(GateKind kind, std::vector<std::size_t> qubits);
  static Gate rotation(const PauliKey& generator, double angle);

  static Gate h(std::size_t q) { return clifford(GateKind::H, {q}); }
  static Gate s(std::size_t q) { return clifford(GateKind::S, {q}); }
  static Gate sdg(std::size_t q) { return clifford(GateKind::Sdg, {q}); }
  static Gate x(std::size_t q) { return clifford(GateKind::X, {q}); }
  static Gate y(std::size_t q) { return clifford(GateKind::Y, {q}); }
  static Gate z(std::size_t q) { return clifford(GateKind::Z, {q}); }
  static Gate cx(std::size_t control, std::size_t target) {
    return clifford(GateKind::CX, {control, target});
  }

  bool is_clifford() const { return kind != GateKind::PauliRotation; }

  /// Throws std::invalid_argument if the gate is malformed for an n-qubit circuit.
  void validate(std::size_t n) const;

  friend bool operator==(const Gate&, const Gate&) = default;
};

/// Gates applied in list order. Truncation happens between slices.
struct Slice {
  std::vector<Gate> gates;

  friend bool operator==(const Slice&, const Slice&) = default;
};

/// An n-qubit circuit; slice 0 is applied first.
class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(std::size_t n, std::vector<Slice> slices = {});

  std::size_t num_qubits() const { return n_; }
  const std::vector<Slice>& slices() const { return slices_; }
  std::size_t num_slices() const { return slices_.size(); }
  std::size_t num_gates() const;

  void append(Slice slice);
  void append(const Circuit& other);

  /// Re-slices the same gate sequence with one gate per slice.
  Circuit one_gate_per_slice() const;

  /// First `count` slices and the remainder, i.e. (U_Q, U_C) with U = U_C U_Q.
  std::pair<Circuit, Circuit> split_at(std::size_t count) const;

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Slice> slices_;
};

enum class LatticeKind { ChainOpen, ChainClosed, HeavyHex, Custom };

std::string_view lattice_kind_name(LatticeKind kind);

/// Interaction graph with a proper edge coloring (no two same-colored edges share a site).
struct Lattice {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<int> colors;
  LatticeKind kind = LatticeKind::Custom;

  int num_colors() const;
  std::vector<std::vector<std::size_t>> edges_by_color() const;

  /// Throws std::invalid_argument on bad indices, duplicate edges or an improper coloring.
  void validate() const;
};

Lattice chain_lattice(std::size_t n, bool closed);

/// The 127-site heavy-hex lattice, loaded from the shipped data file.
Lattice heavy_hex_lattice();

/**
 * Proper edge coloring with max-degree colors for bipartite graphs, falling
 * back to extra colors otherwise. Edges are processed in the given order, so
 * the result is deterministic.
 */
std::vector<int> edge_coloring(std::size_t n,
                               const std::vector<std::pair<std::size_t, std::size_t>>& edges);

enum class TrotterOrdering {
  /// Color by color with the color order reversed on alternate steps; conserves polarization.
  Symmetric,
  /// All XX rotations, then all YY rotations, then the field; breaks the U(1) symmetry.
  XXThenYY,
  /// The same color order every step, nothing fused: the plain product U(tau)^k.
  Repeated,
};

std::string_view trotter_ordering_name(TrotterOrdering o);
TrotterOrdering parse_trotter_ordering(std::string_view name);

struct XYTrotterParams {
  double J = 1.0;
  double h = 0.0;
  double tau = 0.05;
  int steps = 1;
  TrotterOrdering ordering = TrotterOrdering::Symmetric;
  /// Fuse the boundary color layer of neighboring steps (Symmetric only).
  bool merge_adjacent = true;
};

/**
 * Trotter circuit for H = J sum_<ij> (X_i X_j + Y_i Y_j) + h sum_i Z_i.
 *
 * Each edge term exp(-i J tau (XX + YY)) becomes two commuting rotations
 * (XX then YY) of angle 2 J tau; a fused cross-step pair uses 4 J tau.
 * One slice per commuting layer.
 */
Circuit synth_xy_trotter(const Lattice& lattice, const XYTrotterParams& params);

/// Drops gates outside the backward lightcone of `support`.
Circuit lightcone_prune(const Circuit& circuit, const std::set<std::size_t>& support);

/// Longest chain of multi-qubit gates under qubit-sharing dependency.
std::size_t two_qubit_depth(const Circuit& circuit);

/// Number of multi-qubit gates; an XX+YY edge rotation is two of them.
std::size_t two_qubit_gate_count(const Circuit& circuit);

}  // namespace obp
