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

#include "support.hpp"

#include <cmath>
#include <stdexcept>

namespace obp::test {

PauliKey random_key(Rng& rng, std::size_t n, bool allow_identity) {
  for (;;) {
    PauliKey k(n);
    for (std::size_t q = 0; q < n; ++q) k.set(q, "IXYZ"[rng() % 4]);
    if (allow_identity || !k.is_identity()) return k;
  }
}

PauliSum random_sum(Rng& rng, std::size_t n, std::size_t terms) {
  std::normal_distribution<double> g;
  PauliSum s(n);
  while (s.size() < terms) s.add(random_key(rng, n), g(rng));
  return s;
}

Circuit random_circuit(Rng& rng, std::size_t n, std::size_t depth, std::size_t gates_per_slice) {
  std::uniform_real_distribution<double> angle(-3.2, 3.2);
  std::vector<Slice> slices;
  for (std::size_t d = 0; d < depth; ++d) {
    Slice s;
    for (std::size_t g = 0; g < gates_per_slice; ++g) {
      const std::size_t q = rng() % n;
      switch (rng() % 9) {
        case 0: s.gates.push_back(Gate::h(q)); break;
        case 1: s.gates.push_back(Gate::s(q)); break;
        case 2: s.gates.push_back(Gate::sdg(q)); break;
        case 3: s.gates.push_back(Gate::x(q)); break;
        case 4: s.gates.push_back(Gate::y(q)); break;
        case 5: s.gates.push_back(Gate::z(q)); break;
        case 6: {
          if (n < 2) break;
          std::size_t t = rng() % n;
          while (t == q) t = rng() % n;
          s.gates.push_back(Gate::cx(q, t));
          break;
        }
        default: {
          // Low-weight generators, like the gates of a local circuit.
          PauliKey gen(n);
          const std::size_t w = 1 + rng() % std::min<std::size_t>(3, n);
          for (std::size_t i = 0; i < w; ++i) gen.set(rng() % n, "XYZ"[rng() % 3]);
          if (gen.is_identity()) gen.set(q, 'Z');
          s.gates.push_back(Gate::rotation(gen, angle(rng)));
          break;
        }
      }
    }
    slices.push_back(std::move(s));
  }
  return Circuit(n, std::move(slices));
}

DenseState random_state(Rng& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<cplx> a(std::size_t{1} << n);
  double norm = 0.0;
  for (auto& x : a) {
    x = {g(rng), g(rng)};
    norm += std::norm(x);
  }
  for (auto& x : a) x /= std::sqrt(norm);
  return DenseState(n, std::move(a));
}

namespace {

using C = std::complex<double>;

std::vector<C> single(char p) {
  switch (p) {
    case 'I': return {1, 0, 0, 1};
    case 'X': return {0, 1, 1, 0};
    case 'Y': return {0, C(0, -1), C(0, 1), 0};
    case 'Z': return {1, 0, 0, -1};
  }
  throw std::invalid_argument("bad Pauli letter");
}

}  // namespace

Matrix kron_pauli(const PauliKey& key) {
  const std::size_t n = key.num_qubits();
  Matrix m{1.0};
  std::size_t dim = 1;
  // Highest qubit first so that qubit 0 ends up as the least significant bit.
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = single(key.at(n - 1 - i));
    Matrix next(dim * 2 * dim * 2);
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t a = 0; a < 2; ++a) {
          for (std::size_t b = 0; b < 2; ++b) {
            next[(r * 2 + a) * (dim * 2) + (c * 2 + b)] = m[r * dim + c] * p[a * 2 + b];
          }
        }
      }
    }
    m = std::move(next);
    dim *= 2;
  }
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b, std::size_t dim) {
  Matrix out(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      const C v = a[i * dim + k];
      if (v == C(0)) continue;
      for (std::size_t j = 0; j < dim; ++j) out[i * dim + j] += v * b[k * dim + j];
    }
  }
  return out;
}

PauliSum decompose_by_trace(const Matrix& m, std::size_t n) {
  const std::size_t dim = std::size_t{1} << n;
  PauliSum out(n);
  const std::size_t total = std::size_t{1} << (2 * n);
  for (std::size_t code = 0; code < total; ++code) {
    PauliKey k(n);
    for (std::size_t q = 0; q < n; ++q) k.set(q, "IXYZ"[(code >> (2 * q)) & 3]);
    const Matrix p = kron_pauli(k);
    C tr = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) tr += p[i * dim + j] * m[j * dim + i];
    }
    tr /= static_cast<double>(dim);
    if (std::abs(tr.imag()) > 1e-9) throw std::logic_error("matrix is not Hermitian");
    if (std::abs(tr.real()) > 1e-13) out.add(k, tr.real());
  }
  return out;
}

std::complex<double> kron_expectation(const PauliSum& op, const std::vector<std::complex<double>>& a) {
  const std::size_t dim = a.size();
  C total = 0;
  for (const auto& [k, c] : op) {
    const Matrix p = kron_pauli(k);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) total += c * std::conj(a[i]) * p[i * dim + j] * a[j];
    }
  }
  return total;
}

double max_coeff_diff(const PauliSum& a, const PauliSum& b) {
  double d = 0.0;
  for (const auto& [k, c] : a) d = std::max(d, std::abs(c - b.coeff(k)));
  for (const auto& [k, c] : b) d = std::max(d, std::abs(c - a.coeff(k)));
  return d;
}

}  // namespace obp::test
