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

// Shared fixtures and independent reference computations for the tests.

#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "obp/circuit.hpp"
#include "obp/oracle.hpp"
#include "obp/pauli.hpp"

namespace obp::test {

using Rng = std::mt19937_64;

PauliKey random_key(Rng& rng, std::size_t n, bool allow_identity = true);
PauliSum random_sum(Rng& rng, std::size_t n, std::size_t terms);

/// Mixed Clifford and Pauli-rotation circuit.
Circuit random_circuit(Rng& rng, std::size_t n, std::size_t depth, std::size_t gates_per_slice);

/// Haar-ish random state from normalized Gaussian amplitudes.
DenseState random_state(Rng& rng, std::size_t n);

/// Row-major 2^n x 2^n matrix of a Pauli string.
using Matrix = std::vector<std::complex<double>>;

/// Kronecker product of single-qubit matrices; qubit q is bit q of the index.
Matrix kron_pauli(const PauliKey& key);
Matrix matmul(const Matrix& a, const Matrix& b, std::size_t dim);

/// Trace-based coefficient of every Pauli in a matrix.
PauliSum decompose_by_trace(const Matrix& m, std::size_t n);

/// <a|O|a> computed by summing per-term Kronecker matrices.
std::complex<double> kron_expectation(const PauliSum& op, const std::vector<std::complex<double>>& a);

double max_coeff_diff(const PauliSum& a, const PauliSum& b);

}  // namespace obp::test
