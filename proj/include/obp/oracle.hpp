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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "obp/circuit.hpp"
#include "obp/pauli.hpp"

namespace obp {

using cplx = std::complex<double>;

constexpr std::size_t kMaxStateQubits = 14;
constexpr std::size_t kMaxOperatorQubits = 12;

/// Dense statevector; qubit q is bit q of the basis index.
class DenseState {
 public:
  explicit DenseState(std::size_t n);  ///< |0...0>
  DenseState(std::size_t n, std::vector<cplx> amplitudes);

  static DenseState basis(std::size_t n, std::uint64_t index);

  std::size_t num_qubits() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  std::vector<cplx>& amplitudes() { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[i]; }

  double norm() const;

 private:
  std::size_t n_;
  std::vector<cplx> amps_;
};

/// x/z bit masks of a key for n <= 64.
struct PauliMasks {
  std::uint64_t x = 0, z = 0;
  int num_y = 0;
};
PauliMasks pauli_masks(const PauliKey& key);

/// out = P in
void apply_pauli(const PauliKey& key, const std::vector<cplx>& in, std::vector<cplx>& out);

void apply_gate(DenseState& state, const Gate& gate);
/// Slices in order, gates within a slice in order.
void apply_circuit(DenseState& state, const Circuit& circuit);

/// <psi|P|psi>, complex.
cplx pauli_expectation(const DenseState& state, const PauliKey& key);

/// <psi|O|psi>; throws std::logic_error if the imaginary part is not negligible.
double expectation(const DenseState& state, const PauliSum& op);

/// Dense 2^n x 2^n matrix, row-major.
class DenseOperator {
 public:
  explicit DenseOperator(std::size_t n);

  static DenseOperator from_pauli_sum(const PauliSum& s);
  /// Unitary of the circuit, built column by column.
  static DenseOperator unitary(const Circuit& circuit);

  std::size_t num_qubits() const { return n_; }
  std::size_t dim() const { return dim_; }
  cplx& operator()(std::size_t r, std::size_t c) { return m_[r * dim_ + c]; }
  cplx operator()(std::size_t r, std::size_t c) const { return m_[r * dim_ + c]; }

  DenseOperator adjoint() const;
  DenseOperator operator*(const DenseOperator& other) const;
  /// Largest |A - A^dagger| entry.
  double anti_hermitian_part() const;
  /// Tr(P A) / 2^n for every non-negligible P (exhaustive over 4^n keys).
  PauliSum pauli_decomposition(double cutoff = 1e-14) const;

 private:
  std::size_t n_, dim_;
  std::vector<cplx> m_;
};

/// Exact U^dagger O U expanded in Paulis, for small n.
PauliSum dense_heisenberg(const PauliSum& observable, const Circuit& circuit);

struct TruncationError {
  double expectation_error = 0.0;  ///< |<psi|Delta|psi>|
  double spectral_norm = 0.0;      ///< largest singular value of Delta
};

struct SpectralOptions {
  double tolerance = 1e-8;
  std::size_t max_iterations = 5000;
  std::uint64_t seed = 1;
};

/// Power iteration on Delta^dagger Delta without forming the matrix.
double spectral_norm(const PauliSum& delta, const SpectralOptions& opts = {});

TruncationError exact_truncation_error(const PauliSum& delta, const DenseState& state,
                                       bool with_spectral_norm = true,
                                       const SpectralOptions& opts = {});

/// (1/n) sum_i Z_i
PauliSum polarization(std::size_t n);

struct LocalizationParams {
  std::size_t n = 12;
  double tau = 0.1;
  double mu = 4.0;
  double J = 1.0;
  /// Averaging window in Trotter steps, inclusive.
  std::size_t first_step = 200;
  std::size_t last_step = 400;
};

/**
 * Time average of |<M>_t - <M>_0| over the window for the closed chain under
 * the symmetry-breaking ordering, starting from |0...0>.
 */
double localization_deviation(const LocalizationParams& params);

}  // namespace obp
