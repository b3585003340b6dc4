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

#include "obp/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

namespace obp {

namespace {

constexpr cplx kI{0.0, 1.0};

cplx i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

void check_state_size(std::size_t n) {
  if (n == 0 || n > kMaxStateQubits) {
    throw std::invalid_argument("dense state supports 1.." + std::to_string(kMaxStateQubits) +
                                " qubits, got " + std::to_string(n));
  }
}

void check_operator_size(std::size_t n) {
  if (n == 0 || n > kMaxOperatorQubits) {
    throw std::invalid_argument("dense operator supports 1.." + std::to_string(kMaxOperatorQubits) +
                                " qubits, got " + std::to_string(n));
  }
}

// Sign of P|b> relative to i^{#Y}|b ^ x>.
inline double z_sign(std::uint64_t b, std::uint64_t z) {
  return (std::popcount(b & z) & 1) ? -1.0 : 1.0;
}

void apply_rotation(std::vector<cplx>& a, const PauliKey& gen, double angle) {
  const PauliMasks m = pauli_masks(gen);
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  const cplx ys = i_power(m.num_y);
  const std::size_t dim = a.size();
  if (m.x == 0) {
    for (std::size_t b = 0; b < dim; ++b) a[b] *= cplx(c, 0) - kI * s * ys * z_sign(b, m.z);
    return;
  }
  const std::uint64_t top = std::uint64_t{1} << (63 - std::countl_zero(m.x));
  for (std::size_t b = 0; b < dim; ++b) {
    if (b & top) continue;
    const std::size_t p = b ^ m.x;
    const cplx pb = ys * z_sign(b, m.z);  // P|b> = pb |p>
    const cplx pp = ys * z_sign(p, m.z);  // P|p> = pp |b>
    const cplx ab = a[b], ap = a[p];
    a[b] = c * ab - kI * s * pp * ap;
    a[p] = c * ap - kI * s * pb * ab;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseState

DenseState::DenseState(std::size_t n) : n_(n) {
  check_state_size(n);
  amps_.assign(std::size_t{1} << n, cplx{});
  amps_[0] = 1.0;
}

DenseState::DenseState(std::size_t n, std::vector<cplx> amplitudes)
    : n_(n), amps_(std::move(amplitudes)) {
  check_state_size(n);
  if (amps_.size() != (std::size_t{1} << n)) {
    throw std::invalid_argument("amplitude vector has the wrong length");
  }
  if (std::abs(norm() - 1.0) > 1e-10) throw std::invalid_argument("state is not normalized");
}

DenseState DenseState::basis(std::size_t n, std::uint64_t index) {
  DenseState s(n);
  if (index >= s.dim()) throw std::out_of_range("basis index out of range");
  s.amps_[0] = 0.0;
  s.amps_[index] = 1.0;
  return s;
}

double DenseState::norm() const {
  double acc = 0.0;
  for (const auto& a : amps_) acc += std::norm(a);
  return std::sqrt(acc);
}

PauliMasks pauli_masks(const PauliKey& key) {
  if (key.num_qubits() > 64) throw std::invalid_argument("dense masks need n <= 64");
  PauliMasks m;
  for (std::size_t q = 0; q < key.num_qubits(); ++q) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    if (key.x(q)) m.x |= bit;
    if (key.z(q)) m.z |= bit;
    if (key.x(q) && key.z(q)) ++m.num_y;
  }
  return m;
}

void apply_pauli(const PauliKey& key, const std::vector<cplx>& in, std::vector<cplx>& out) {
  const PauliMasks m = pauli_masks(key);
  const cplx ys = i_power(m.num_y);
  out.assign(in.size(), cplx{});
  for (std::size_t b = 0; b < in.size(); ++b) out[b ^ m.x] = ys * z_sign(b, m.z) * in[b];
}

void apply_gate(DenseState& state, const Gate& gate) {
  gate.validate(state.num_qubits());
  auto& a = state.amplitudes();
  const std::size_t dim = a.size();
  if (gate.kind == GateKind::PauliRotation) {
    apply_rotation(a, *gate.generator, gate.angle);
    return;
  }
  const std::size_t q = gate.qubits[0];
  const std::size_t bit = std::size_t{1} << q;
  if (gate.kind == GateKind::CX) {
    const std::size_t tbit = std::size_t{1} << gate.qubits[1];
    for (std::size_t b = 0; b < dim; ++b) {
      if ((b & bit) && !(b & tbit)) std::swap(a[b], a[b | tbit]);
    }
    return;
  }
  const double r = 1.0 / std::sqrt(2.0);
  for (std::size_t b = 0; b < dim; ++b) {
    if (b & bit) continue;
    cplx& a0 = a[b];
    cplx& a1 = a[b | bit];
    switch (gate.kind) {
      case GateKind::H: {
        const cplx u = a0, v = a1;
        a0 = r * (u + v);
        a1 = r * (u - v);
        break;
      }
      case GateKind::S: a1 *= kI; break;
      case GateKind::Sdg: a1 *= -kI; break;
      case GateKind::X: std::swap(a0, a1); break;
      case GateKind::Y: {
        const cplx u = a0, v = a1;
        a0 = -kI * v;
        a1 = kI * u;
        break;
      }
      case GateKind::Z: a1 = -a1; break;
      default: throw std::logic_error("unhandled gate kind");
    }
  }
}

void apply_circuit(DenseState& state, const Circuit& circuit) {
  if (circuit.num_qubits() != state.num_qubits()) {
    throw std::invalid_argument("circuit and state widths differ");
  }
  for (const auto& slice : circuit.slices()) {
    for (const auto& g : slice.gates) apply_gate(state, g);
  }
}

cplx pauli_expectation(const DenseState& state, const PauliKey& key) {
  if (key.num_qubits() != state.num_qubits()) {
    throw std::invalid_argument("operator and state widths differ");
  }
  const PauliMasks m = pauli_masks(key);
  const auto& a = state.amplitudes();
  cplx acc{};
  for (std::size_t b = 0; b < a.size(); ++b) acc += std::conj(a[b ^ m.x]) * z_sign(b, m.z) * a[b];
  return i_power(m.num_y) * acc;
}

double expectation(const DenseState& state, const PauliSum& op) {
  if (op.num_qubits() != state.num_qubits()) {
    throw std::invalid_argument("operator and state widths differ");
  }
  cplx acc{};
  for (const auto& [k, c] : op) acc += c * pauli_expectation(state, k);
  if (std::abs(acc.imag()) > 1e-10 * std::max(1.0, l1_norm(op))) {
    throw std::logic_error("expectation value has an imaginary part of " +
                           std::to_string(acc.imag()));
  }
  return acc.real();
}

// ---------------------------------------------------------------------------
// DenseOperator

DenseOperator::DenseOperator(std::size_t n) : n_(n), dim_(std::size_t{1} << n) {
  check_operator_size(n);
  m_.assign(dim_ * dim_, cplx{});
}

DenseOperator DenseOperator::from_pauli_sum(const PauliSum& s) {
  DenseOperator out(s.num_qubits());
  for (const auto& [k, c] : s) {
    const PauliMasks m = pauli_masks(k);
    const cplx ys = i_power(m.num_y);
    for (std::size_t b = 0; b < out.dim_; ++b) out(b ^ m.x, b) += c * ys * z_sign(b, m.z);
  }
  return out;
}

DenseOperator DenseOperator::unitary(const Circuit& circuit) {
  DenseOperator u(circuit.num_qubits());
  for (std::size_t col = 0; col < u.dim_; ++col) {
    DenseState s = DenseState::basis(circuit.num_qubits(), col);
    apply_circuit(s, circuit);
    for (std::size_t r = 0; r < u.dim_; ++r) u(r, col) = s[r];
  }
  return u;
}

DenseOperator DenseOperator::adjoint() const {
  DenseOperator out(n_);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
  }
  return out;
}

DenseOperator DenseOperator::operator*(const DenseOperator& other) const {
  if (other.n_ != n_) throw std::invalid_argument("operator widths differ");
  DenseOperator out(n_);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = 0; k < dim_; ++k) {
      const cplx v = (*this)(r, k);
      if (v == cplx{}) continue;
      for (std::size_t c = 0; c < dim_; ++c) out(r, c) += v * other(k, c);
    }
  }
  return out;
}

double DenseOperator::anti_hermitian_part() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t c = r; c < dim_; ++c) {
      worst = std::max(worst, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
    }
  }
  return worst;
}

PauliSum DenseOperator::pauli_decomposition(double cutoff) const {
  PauliSum out(n_);
  const double scale = 1.0 / static_cast<double>(dim_);
  for (std::uint64_t x = 0; x < dim_; ++x) {
    for (std::uint64_t z = 0; z < dim_; ++z) {
      const int num_y = std::popcount(x & z);
      // Tr(P A) = sum_k <k ^ x| ... = sum_k phase(k) A(k, k ^ x)
      cplx acc{};
      for (std::size_t k = 0; k < dim_; ++k) acc += z_sign(k, z) * (*this)(k, k ^ x);
      acc *= i_power(num_y) * scale;
      if (std::abs(acc) <= cutoff) continue;
      if (std::abs(acc.imag()) > 1e-9) {
        throw std::logic_error("operator is not Hermitian; Pauli coefficient is complex");
      }
      PauliKey key(n_);
      for (std::size_t q = 0; q < n_; ++q) key.set(q, (z >> q) & 1, (x >> q) & 1);
      out.insert_new(std::move(key), acc.real());
    }
  }
  return out;
}

PauliSum dense_heisenberg(const PauliSum& observable, const Circuit& circuit) {
  if (observable.num_qubits() != circuit.num_qubits()) {
    throw std::invalid_argument("observable and circuit widths differ");
  }
  const DenseOperator u = DenseOperator::unitary(circuit);
  const DenseOperator o = DenseOperator::from_pauli_sum(observable);
  return (u.adjoint() * o * u).pauli_decomposition();
}

// ---------------------------------------------------------------------------
// Truncation error

namespace {

// Delta grouped by x mask: (Delta v)[b ^ x] += d_x[b] v[b].
struct GroupedOperator {
  std::vector<std::uint64_t> xs;
  std::vector<std::vector<cplx>> diagonals;

  GroupedOperator(const PauliSum& s, std::size_t dim) {
    std::map<std::uint64_t, std::vector<std::pair<PauliMasks, double>>> by_x;
    for (const auto& [k, c] : s) {
      const PauliMasks m = pauli_masks(k);
      by_x[m.x].push_back({m, c});
    }
    for (const auto& [x, terms] : by_x) {
      std::vector<cplx> d(dim, cplx{});
      for (const auto& [m, c] : terms) {
        const cplx ys = c * i_power(m.num_y);
        for (std::size_t b = 0; b < dim; ++b) d[b] += ys * z_sign(b, m.z);
      }
      xs.push_back(x);
      diagonals.push_back(std::move(d));
    }
  }

  void apply(const std::vector<cplx>& in, std::vector<cplx>& out) const {
    out.assign(in.size(), cplx{});
    for (std::size_t g = 0; g < xs.size(); ++g) {
      const auto& d = diagonals[g];
      const std::uint64_t x = xs[g];
      for (std::size_t b = 0; b < in.size(); ++b) out[b ^ x] += d[b] * in[b];
    }
  }
};

double vec_norm(const std::vector<cplx>& v) {
  double acc = 0.0;
  for (const auto& a : v) acc += std::norm(a);
  return std::sqrt(acc);
}

}  // namespace

double spectral_norm(const PauliSum& delta, const SpectralOptions& opts) {
  if (delta.empty()) return 0.0;
  check_operator_size(delta.num_qubits());
  const std::size_t dim = std::size_t{1} << delta.num_qubits();
  const GroupedOperator op(delta, dim);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  std::vector<cplx> v(dim), w, u;
  for (auto& a : v) a = {gauss(rng), gauss(rng)};
  const double n0 = vec_norm(v);
  for (auto& a : v) a /= n0;

  double lambda = 0.0;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    op.apply(v, w);
    op.apply(w, u);  // Delta is Hermitian, so Delta^dagger Delta = Delta^2
    const double next = vec_norm(w) * vec_norm(w);
    const double nu = vec_norm(u);
    if (nu == 0.0) return std::sqrt(next);
    for (std::size_t b = 0; b < dim; ++b) v[b] = u[b] / nu;
    if (it > 0 && std::abs(next - lambda) <= opts.tolerance * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

TruncationError exact_truncation_error(const PauliSum& delta, const DenseState& state,
                                       bool with_spectral_norm, const SpectralOptions& opts) {
  TruncationError out;
  if (delta.empty()) return out;
  out.expectation_error = std::abs(expectation(state, delta));
  if (with_spectral_norm) out.spectral_norm = spectral_norm(delta, opts);
  return out;
}

// ---------------------------------------------------------------------------
// Localization

PauliSum polarization(std::size_t n) {
  PauliSum m(n);
  for (std::size_t q = 0; q < n; ++q) {
    PauliKey k(n);
    k.set(q, 'Z');
    m.add(k, 1.0 / static_cast<double>(n));
  }
  return m;
}

double localization_deviation(const LocalizationParams& p) {
  if (p.first_step > p.last_step) throw std::invalid_argument("averaging window is empty");
  check_state_size(p.n);
  if (p.tau == 0.0) return 0.0;

  XYTrotterParams tp;
  tp.J = p.J;
  tp.h = p.mu;
  tp.tau = p.tau;
  tp.steps = 1;
  tp.ordering = TrotterOrdering::XXThenYY;
  const Circuit step = synth_xy_trotter(chain_lattice(p.n, true), tp);

  DenseState state(p.n);
  const auto& a = state.amplitudes();
  auto polar = [&] {
    double acc = 0.0;
    for (std::size_t b = 0; b < a.size(); ++b) {
      acc += std::norm(a[b]) *
             (static_cast<double>(p.n) - 2.0 * std::popcount(static_cast<std::uint64_t>(b)));
    }
    return acc / static_cast<double>(p.n);
  };
  const double m0 = polar();

  double sum = 0.0;
  for (std::size_t t = 1; t <= p.last_step; ++t) {
    apply_circuit(state, step);
    if (t >= p.first_step) sum += std::abs(polar() - m0);
  }
  const std::size_t count = p.last_step - std::max<std::size_t>(p.first_step, 1) + 1;
  return p.first_step == 0 ? sum / static_cast<double>(count + 1) : sum / static_cast<double>(count);
}

}  // namespace obp
