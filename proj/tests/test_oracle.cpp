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

#include <cmath>

#include "obp/backprop.hpp"
#include "obp/oracle.hpp"
#include "support.hpp"

namespace obp {
namespace {

using test::Rng;

TEST(DenseState, Construction) {
  const DenseState s(3);
  EXPECT_EQ(s.dim(), 8u);
  EXPECT_EQ(s[0], cplx(1.0));
  EXPECT_EQ(DenseState::basis(3, 5)[5], cplx(1.0));
  EXPECT_THROW(DenseState(2, std::vector<cplx>(4, 1.0)), std::invalid_argument);
  EXPECT_THROW(DenseState(kMaxStateQubits + 1), std::invalid_argument);
}

TEST(ApplyPauli, MatchesKroneckerMatrices) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 4;
    const PauliKey k = test::random_key(rng, n);
    const DenseState psi = test::random_state(rng, n);
    std::vector<cplx> out(psi.dim());
    apply_pauli(k, psi.amplitudes(), out);
    const auto m = test::kron_pauli(k);
    for (std::size_t i = 0; i < psi.dim(); ++i) {
      cplx want = 0;
      for (std::size_t j = 0; j < psi.dim(); ++j) want += m[i * psi.dim() + j] * psi[j];
      ASSERT_LT(std::abs(out[i] - want), 1e-14);
    }
  }
}

TEST(Expectation, MatchesKroneckerSum) {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const PauliSum s = test::random_sum(rng, 4, 12);
    const DenseState psi = test::random_state(rng, 4);
    EXPECT_NEAR(expectation(psi, s), test::kron_expectation(s, psi.amplitudes()).real(), 1e-12);
  }
}

TEST(ApplyGate, MatchesUnitaryColumns) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Circuit c = test::random_circuit(rng, 3, 4, 3);
    const DenseOperator u = DenseOperator::unitary(c);
    const DenseState psi = test::random_state(rng, 3);
    DenseState out = psi;
    apply_circuit(out, c);
    for (std::size_t r = 0; r < 8; ++r) {
      cplx want = 0;
      for (std::size_t col = 0; col < 8; ++col) want += u(r, col) * psi[col];
      ASSERT_LT(std::abs(out[r] - want), 1e-12);
    }
    EXPECT_NEAR(out.norm(), 1.0, 1e-12);
  }
}

TEST(DenseOperator, DecompositionRoundTrip) {
  Rng rng(6);
  const PauliSum s = test::random_sum(rng, 4, 20);
  const DenseOperator m = DenseOperator::from_pauli_sum(s);
  EXPECT_LT(m.anti_hermitian_part(), 1e-14);
  EXPECT_LT(test::max_coeff_diff(m.pauli_decomposition(), s), 1e-13);
}

TEST(DenseHeisenberg, MatchesMatrixProduct) {
  Rng rng(7);
  const Circuit c = test::random_circuit(rng, 3, 5, 3);
  const PauliSum o = test::random_sum(rng, 3, 4);
  const DenseOperator u = DenseOperator::unitary(c);
  const DenseOperator h = u.adjoint() * DenseOperator::from_pauli_sum(o) * u;
  EXPECT_LT(test::max_coeff_diff(dense_heisenberg(o, c), h.pauli_decomposition()), 1e-12);
}

TEST(SpectralNorm, KnownOperators) {
  PauliSum a(2);
  a.add(PauliKey::from_string("ZI"), 1.0);
  a.add(PauliKey::from_string("IZ"), 1.0);
  EXPECT_NEAR(spectral_norm(a), 2.0, 1e-7);
  PauliSum b(1);
  b.add(PauliKey::from_string("X"), 1.0);
  b.add(PauliKey::from_string("Z"), 1.0);
  EXPECT_NEAR(spectral_norm(b), std::sqrt(2.0), 1e-7);
  EXPECT_EQ(spectral_norm(PauliSum(3)), 0.0);
}

TEST(SpectralNorm, BoundedByL1AndAboveL2Average) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const PauliSum d = test::random_sum(rng, 5, 15);
    const double s = spectral_norm(d);
    EXPECT_LE(s, l1_norm(d) + 1e-9);
    // ||D||^2 >= Tr(D^2)/2^n = sum c^2.
    EXPECT_GE(s, l2_norm(d) - 1e-6);
  }
}

TEST(TruncationError, BothNormsReported) {
  PauliSum d(2);
  d.add(PauliKey::from_string("ZI"), 0.25);
  d.add(PauliKey::from_string("XI"), 0.5);
  const auto e = exact_truncation_error(d, DenseState(2));
  EXPECT_NEAR(e.expectation_error, 0.25, 1e-15);
  EXPECT_NEAR(e.spectral_norm, std::sqrt(0.25 * 0.25 + 0.5 * 0.5), 1e-7);
}

TEST(Polarization, SymmetricTrotterConserves) {
  for (std::size_t n : {4u, 7u, 10u}) {
    XYTrotterParams p;
    p.tau = 0.1;
    p.steps = 25;
    const Circuit c = synth_xy_trotter(chain_lattice(n, true), p);
    Rng rng(n);
    const DenseState psi0 = test::random_state(rng, n);
    DenseState psi = psi0;
    apply_circuit(psi, c);
    EXPECT_NEAR(expectation(psi, polarization(n)), expectation(psi0, polarization(n)), 1e-10);
  }
}

TEST(Polarization, XXThenYYDoesNot) {
  XYTrotterParams p;
  p.tau = 0.2;
  p.steps = 5;
  p.ordering = TrotterOrdering::XXThenYY;
  const Circuit c = synth_xy_trotter(chain_lattice(6, true), p);
  DenseState psi(6);
  apply_circuit(psi, c);
  EXPECT_GT(std::abs(expectation(psi, polarization(6)) - 1.0), 1e-6);
}

TEST(Localization, ZeroStepIsZeroAndDeviationGrowsWithTau) {
  LocalizationParams p;
  p.n = 6;
  p.first_step = 20;
  p.last_step = 40;
  p.tau = 0.0;
  EXPECT_EQ(localization_deviation(p), 0.0);
  double prev = 0.0;
  for (double tau : {0.01, 0.02, 0.04, 0.08}) {
    p.tau = tau;
    const double d = localization_deviation(p);
    EXPECT_GT(d, prev);
    prev = d;
  }
  p.first_step = 50;
  EXPECT_THROW(localization_deviation(p), std::invalid_argument);
}

}  // namespace
}  // namespace obp
