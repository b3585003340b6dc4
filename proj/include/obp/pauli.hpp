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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace obp {

/**
 * An n-qubit Pauli operator without phase, stored symplectically.
 *
 * Qubit q contributes bit (q % 64) of word (q / 64) in both the Z block and
 * the X block. Per qubit: (z,x) = (0,0) I, (1,0) Z, (0,1) X, (1,1) Y. The
 * represented operator is always the Hermitian product of the single-qubit
 * Paulis I, X, Y, Z, so real coefficients stay real.
 *
 * Keys order by their address (Z block as the high half, X block as the low
 * half), which is a total order over all 4^n Paulis.
 */
class PauliKey {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  PauliKey() = default;

  /// The identity on `n` qubits.
  explicit PauliKey(std::size_t n);

  /// Parses a string over {I,X,Y,Z} with qubit 0 leftmost, e.g. "ZIIX".
  static PauliKey from_string(std::string_view s);

  /// Builds a key from sparse (qubit, 'X'|'Y'|'Z') factors.
  static PauliKey from_sparse(std::size_t n, std::span<const std::pair<std::size_t, char>> factors);

  std::size_t num_qubits() const { return n_; }
  std::size_t num_words() const { return words_.size() / 2; }

  bool z(std::size_t q) const;
  bool x(std::size_t q) const;
  void set(std::size_t q, bool z, bool x);

  /// Single-qubit factor as one of 'I', 'X', 'Y', 'Z'.
  char at(std::size_t q) const;
  void set(std::size_t q, char pauli);

  std::string str() const;
  bool is_identity() const;
  std::size_t weight() const;
  std::vector<std::size_t> support() const;

  std::span<const Word> z_words() const { return {words_.data(), num_words()}; }
  std::span<const Word> x_words() const { return {words_.data() + num_words(), num_words()}; }
  std::span<Word> z_words() { return {words_.data(), num_words()}; }
  std::span<Word> x_words() { return {words_.data() + num_words(), num_words()}; }

  std::size_t hash() const;

  friend bool operator==(const PauliKey& a, const PauliKey& b) {
    return a.n_ == b.n_ && a.words_ == b.words_;
  }
  friend std::strong_ordering operator<=>(const PauliKey& a, const PauliKey& b);

 private:
  std::size_t n_ = 0;
  boost::container::small_vector<Word, 4> words_;
};

struct PauliKeyHash {
  std::size_t operator()(const PauliKey& k) const { return k.hash(); }
};

template <typename V>
using PauliKeyMap = std::unordered_map<PauliKey, V, PauliKeyHash>;

/// A Pauli with a real coefficient.
struct PauliTerm {
  PauliKey key;
  double coeff = 0.0;
};

/**
 * The 2n-bit integer z * 2^n + x identifying a Pauli; stored as little-endian
 * 64-bit limbs. Also used for partition boundaries, which may equal 4^n and so
 * need one extra bit.
 */
class PauliAddress {
 public:
  PauliAddress() = default;
  explicit PauliAddress(std::uint64_t value);

  /// 4^n, one past the largest address on n qubits.
  static PauliAddress space_end(std::size_t n);

  /// floor(numerator * 4^n / denominator).
  static PauliAddress fraction_of_space(std::size_t n, std::uint64_t numerator,
                                        std::uint64_t denominator);

  std::span<const std::uint64_t> limbs() const { return limbs_; }
  bool is_zero() const { return limbs_.empty(); }
  std::size_t bit_width() const;
  bool bit(std::size_t i) const;

  PauliAddress plus_one() const;
  /// Throws std::domain_error on zero.
  PauliAddress minus_one() const;

  /// Fixed-width big-endian bytes, as used on the wire.
  std::vector<std::uint8_t> to_bytes(std::size_t num_bytes) const;
  static PauliAddress from_bytes(std::span<const std::uint8_t> bytes);

  /// Lower-case hex without leading zeros ("0" for zero).
  std::string hex() const;

  friend bool operator==(const PauliAddress&, const PauliAddress&) = default;
  friend std::strong_ordering operator<=>(const PauliAddress& a, const PauliAddress& b);

 private:
  void normalize();
  std::vector<std::uint64_t> limbs_;
};

PauliAddress encode_address(const PauliKey& key);
PauliKey decode_address(const PauliAddress& address, std::size_t n);

/// Bytes needed to hold any address on n qubits.
inline std::size_t address_bytes(std::size_t n) { return (2 * n + 7) / 8; }

/// Product p*q = i^phase * key, with phase in {0,1,2,3}.
struct PauliProduct {
  PauliKey key;
  int phase = 0;
};

PauliProduct multiply(const PauliKey& p, const PauliKey& q);
bool commutes(const PauliKey& p, const PauliKey& q);
bool qubitwise_commutes(const PauliKey& p, const PauliKey& q);

/**
 * Sparse real linear combination of Paulis on a fixed number of qubits.
 *
 * No key is stored twice and no stored coefficient is exactly zero. Reads
 * may run concurrently; mutation needs exclusive access.
 */
class PauliSum {
 public:
  using Map = PauliKeyMap<double>;
  using const_iterator = Map::const_iterator;

  explicit PauliSum(std::size_t n = 0) : n_(n) {}

  static PauliSum from_terms(std::size_t n, std::span<const PauliTerm> terms);
  static PauliSum single(const PauliKey& key, double coeff = 1.0);

  std::size_t num_qubits() const { return n_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Adds `coeff` to `key`'s coefficient, dropping the key if the sum is 0.
  void add(const PauliKey& key, double coeff);

  /// Stores `coeff` for a key known not to be present.
  void insert_new(PauliKey key, double coeff);

  void erase(const PauliKey& key) { terms_.erase(key); }
  double coeff(const PauliKey& key) const;
  bool contains(const PauliKey& key) const { return terms_.count(key) != 0; }
  void reserve(std::size_t count) { terms_.reserve(count); }
  void clear() { terms_.clear(); }

  const_iterator begin() const { return terms_.begin(); }
  const_iterator end() const { return terms_.end(); }

  /// Terms in ascending address order.
  std::vector<PauliTerm> sorted_terms() const;

 private:
  void check_key(const PauliKey& key) const;

  std::size_t n_ = 0;
  Map terms_;
};

double l1_norm(const PauliSum& s);
double l2_norm(const PauliSum& s);

PauliSum merge(const PauliSum& a, const PauliSum& b);

/// Merges `other` into `into`.
void merge_into(PauliSum& into, const PauliSum& other);

}  // namespace obp
