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

#include "obp/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace obp {

namespace {

// Per-qubit conflict test against a join, one word at a time.
bool compatible(const PauliKey& key, const PauliKey& basis) {
  auto kz = key.z_words(), kx = key.x_words();
  auto bz = basis.z_words(), bx = basis.x_words();
  for (std::size_t w = 0; w < kz.size(); ++w) {
    const auto both = (kz[w] | kx[w]) & (bz[w] | bx[w]);
    const auto differ = (kz[w] ^ bz[w]) | (kx[w] ^ bx[w]);
    if (both & differ) return false;
  }
  return true;
}

void join_into(PauliKey& basis, const PauliKey& key) {
  auto bz = basis.z_words(), bx = basis.x_words();
  auto kz = key.z_words(), kx = key.x_words();
  for (std::size_t w = 0; w < bz.size(); ++w) {
    bz[w] |= kz[w];
    bx[w] |= kx[w];
  }
}

std::vector<PauliKey> ordered_keys(std::vector<PauliTerm> terms) {
  std::sort(terms.begin(), terms.end(), [](const PauliTerm& a, const PauliTerm& b) {
    const double ma = std::abs(a.coeff), mb = std::abs(b.coeff);
    if (ma != mb) return ma > mb;
    return a.key < b.key;
  });
  std::vector<PauliKey> keys;
  keys.reserve(terms.size());
  for (auto& t : terms) keys.push_back(std::move(t.key));
  return keys;
}

}  // namespace

bool measurable_in(const PauliKey& key, const PauliKey& basis) {
  if (key.num_qubits() != basis.num_qubits()) {
    throw std::invalid_argument("key and basis have different qubit counts");
  }
  return compatible(key, basis);
}

std::vector<MeasurementGroup> group_qwc(std::span<const PauliKey> keys) {
  if (keys.empty()) throw std::invalid_argument("cannot group an empty key list");
  const std::size_t n = keys.front().num_qubits();
  std::vector<MeasurementGroup> groups;
  std::unordered_set<PauliKey, PauliKeyHash> seen;
  for (const auto& k : keys) {
    if (k.num_qubits() != n) throw std::invalid_argument("keys have different qubit counts");
    if (!seen.insert(k).second) continue;
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const MeasurementGroup& g) { return compatible(k, g.basis); });
    if (it == groups.end()) {
      groups.push_back({{}, PauliKey(n)});
      it = std::prev(groups.end());
    }
    it->keys.push_back(k);
    join_into(it->basis, k);
  }
  return groups;
}

std::vector<MeasurementGroup> group_qwc(const PauliSum& s) {
  std::vector<PauliTerm> terms;
  terms.reserve(s.size());
  for (const auto& [k, c] : s) terms.push_back({k, c});
  const auto keys = ordered_keys(std::move(terms));
  return group_qwc(keys);
}

std::vector<MeasurementGroup> group_qwc_union(std::span<const PauliSum> sums) {
  PauliKeyMap<double> largest;
  for (const auto& s : sums) {
    for (const auto& [k, c] : s) {
      auto [it, inserted] = largest.try_emplace(k, std::abs(c));
      if (!inserted) it->second = std::max(it->second, std::abs(c));
    }
  }
  std::vector<PauliTerm> terms;
  terms.reserve(largest.size());
  for (const auto& [k, c] : largest) terms.push_back({k, c});
  const auto keys = ordered_keys(std::move(terms));
  return group_qwc(keys);
}

double reconstruct_expectation(std::span<const MeasurementGroup> groups, const KeyValues& values,
                               const KeyValues& coeffs) {
  double total = 0.0;
  for (const auto& g : groups) {
    for (const auto& k : g.keys) {
      auto v = values.find(k);
      auto c = coeffs.find(k);
      if (v == values.end()) throw std::invalid_argument("no measured value for " + k.str());
      if (c == coeffs.end()) throw std::invalid_argument("no coefficient for " + k.str());
      total += c->second * v->second;
    }
  }
  return total;
}

}  // namespace obp
