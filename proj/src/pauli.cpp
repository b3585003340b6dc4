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

#include "obp/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace obp {

namespace {

std::size_t words_for(std::size_t n) { return (n + PauliKey::kWordBits - 1) / PauliKey::kWordBits; }

void require_same_n(const PauliKey& p, const PauliKey& q) {
  if (p.num_qubits() != q.num_qubits()) {
    throw std::invalid_argument("Pauli qubit counts differ: " + std::to_string(p.num_qubits()) +
                                " vs " + std::to_string(q.num_qubits()));
  }
}

}  // namespace

PauliKey::PauliKey(std::size_t n) : n_(n), words_(2 * words_for(n), 0) {}

PauliKey PauliKey::from_string(std::string_view s) {
  if (s.empty()) {
    throw std::invalid_argument("empty Pauli string");
  }
  PauliKey key(s.size());
  for (std::size_t q = 0; q < s.size(); ++q) {
    key.set(q, s[q]);
  }
  return key;
}

PauliKey PauliKey::from_sparse(std::size_t n,
                               std::span<const std::pair<std::size_t, char>> factors) {
  PauliKey key(n);
  for (const auto& [q, p] : factors) {
    if (q >= n) {
      throw std::out_of_range("qubit " + std::to_string(q) + " out of range for n=" +
                              std::to_string(n));
    }
    if (key.at(q) != 'I') {
      throw std::invalid_argument("qubit " + std::to_string(q) + " listed twice");
    }
    key.set(q, p);
  }
  return key;
}

bool PauliKey::z(std::size_t q) const { return (words_[q / kWordBits] >> (q % kWordBits)) & 1; }

bool PauliKey::x(std::size_t q) const {
  return (words_[num_words() + q / kWordBits] >> (q % kWordBits)) & 1;
}

void PauliKey::set(std::size_t q, bool zb, bool xb) {
  if (q >= n_) {
    throw std::out_of_range("qubit index out of range");
  }
  const Word mask = Word{1} << (q % kWordBits);
  Word& zw = words_[q / kWordBits];
  Word& xw = words_[num_words() + q / kWordBits];
  zw = zb ? (zw | mask) : (zw & ~mask);
  xw = xb ? (xw | mask) : (xw & ~mask);
}

char PauliKey::at(std::size_t q) const {
  static constexpr char kChars[4] = {'I', 'X', 'Z', 'Y'};
  return kChars[(z(q) ? 2 : 0) | (x(q) ? 1 : 0)];
}

void PauliKey::set(std::size_t q, char pauli) {
  switch (pauli) {
    case 'I': case 'i': case '_': set(q, false, false); break;
    case 'X': case 'x': set(q, false, true); break;
    case 'Y': case 'y': set(q, true, true); break;
    case 'Z': case 'z': set(q, true, false); break;
    default: throw std::invalid_argument(std::string("invalid Pauli character '") + pauli + "'");
  }
}

std::string PauliKey::str() const {
  std::string out(n_, 'I');
  for (std::size_t q = 0; q < n_; ++q) {
    out[q] = at(q);
  }
  return out;
}

bool PauliKey::is_identity() const {
  return std::all_of(words_.begin(), words_.end(), [](Word w) { return w == 0; });
}

std::size_t PauliKey::weight() const {
  std::size_t w = 0;
  const auto zs = z_words();
  const auto xs = x_words();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    w += std::popcount(zs[i] | xs[i]);
  }
  return w;
}

std::vector<std::size_t> PauliKey::support() const {
  std::vector<std::size_t> out;
  const auto zs = z_words();
  const auto xs = x_words();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    Word w = zs[i] | xs[i];
    while (w != 0) {
      out.push_back(i * kWordBits + std::countr_zero(w));
      w &= w - 1;
    }
  }
  return out;
}

std::size_t PauliKey::hash() const {
  // splitmix64 finalizer folded over the words.
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ n_;
  for (Word w : words_) {
    std::uint64_t v = w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
    h ^= v ^ (v >> 31);
  }
  return static_cast<std::size_t>(h);
}

std::strong_ordering operator<=>(const PauliKey& a, const PauliKey& b) {
  if (a.n_ != b.n_) {
    return a.n_ <=> b.n_;
  }
  const auto az = a.z_words();
  const auto bz = b.z_words();
  for (std::size_t i = az.size(); i-- > 0;) {
    if (az[i] != bz[i]) return az[i] <=> bz[i];
  }
  const auto ax = a.x_words();
  const auto bx = b.x_words();
  for (std::size_t i = ax.size(); i-- > 0;) {
    if (ax[i] != bx[i]) return ax[i] <=> bx[i];
  }
  return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// PauliAddress

PauliAddress::PauliAddress(std::uint64_t value) {
  if (value != 0) limbs_.push_back(value);
}

void PauliAddress::normalize() {
  while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
}

PauliAddress PauliAddress::space_end(std::size_t n) {
  PauliAddress a;
  const std::size_t bit = 2 * n;
  a.limbs_.assign(bit / 64 + 1, 0);
  a.limbs_[bit / 64] = std::uint64_t{1} << (bit % 64);
  return a;
}

PauliAddress PauliAddress::fraction_of_space(std::size_t n, std::uint64_t numerator,
                                             std::uint64_t denominator) {
  if (denominator == 0) {
    throw std::invalid_argument("zero denominator");
  }
  // numerator * 4^n as limbs, then long division by the denominator.
  PauliAddress a = space_end(n);
  unsigned __int128 carry = 0;
  for (auto& limb : a.limbs_) {
    unsigned __int128 v = static_cast<unsigned __int128>(limb) * numerator + carry;
    limb = static_cast<std::uint64_t>(v);
    carry = v >> 64;
  }
  if (carry != 0) a.limbs_.push_back(static_cast<std::uint64_t>(carry));
  unsigned __int128 rem = 0;
  for (std::size_t i = a.limbs_.size(); i-- > 0;) {
    unsigned __int128 cur = (rem << 64) | a.limbs_[i];
    a.limbs_[i] = static_cast<std::uint64_t>(cur / denominator);
    rem = cur % denominator;
  }
  a.normalize();
  return a;
}

std::size_t PauliAddress::bit_width() const {
  if (limbs_.empty()) return 0;
  return 64 * (limbs_.size() - 1) + std::bit_width(limbs_.back());
}

bool PauliAddress::bit(std::size_t i) const {
  if (i / 64 >= limbs_.size()) return false;
  return (limbs_[i / 64] >> (i % 64)) & 1;
}

PauliAddress PauliAddress::plus_one() const {
  PauliAddress a = *this;
  for (auto& limb : a.limbs_) {
    if (++limb != 0) return a;
  }
  a.limbs_.push_back(1);
  return a;
}

PauliAddress PauliAddress::minus_one() const {
  if (is_zero()) throw std::domain_error("address underflow");
  PauliAddress a = *this;
  for (auto& limb : a.limbs_) {
    if (limb-- != 0) break;
  }
  a.normalize();
  return a;
}

std::vector<std::uint8_t> PauliAddress::to_bytes(std::size_t num_bytes) const {
  if (bit_width() > 8 * num_bytes) {
    throw std::length_error("address does not fit in " + std::to_string(num_bytes) + " bytes");
  }
  std::vector<std::uint8_t> out(num_bytes, 0);
  for (std::size_t i = 0; i < num_bytes; ++i) {
    const std::size_t limb = i / 8;
    if (limb >= limbs_.size()) break;
    out[num_bytes - 1 - i] = static_cast<std::uint8_t>(limbs_[limb] >> (8 * (i % 8)));
  }
  return out;
}

PauliAddress PauliAddress::from_bytes(std::span<const std::uint8_t> bytes) {
  PauliAddress a;
  a.limbs_.assign((bytes.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const std::uint64_t b = bytes[bytes.size() - 1 - i];
    a.limbs_[i / 8] |= b << (8 * (i % 8));
  }
  a.normalize();
  return a;
}

std::string PauliAddress::hex() const {
  if (limbs_.empty()) return "0";
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t nib = (bit_width() + 3) / 4; nib-- > 0;) {
    const std::uint64_t limb = limbs_[(4 * nib) / 64];
    out.push_back(kDigits[(limb >> ((4 * nib) % 64)) & 0xf]);
  }
  return out;
}

std::strong_ordering operator<=>(const PauliAddress& a, const PauliAddress& b) {
  if (a.limbs_.size() != b.limbs_.size()) return a.limbs_.size() <=> b.limbs_.size();
  for (std::size_t i = a.limbs_.size(); i-- > 0;) {
    if (a.limbs_[i] != b.limbs_[i]) return a.limbs_[i] <=> b.limbs_[i];
  }
  return std::strong_ordering::equal;
}

PauliAddress encode_address(const PauliKey& key) {
  const std::size_t n = key.num_qubits();
  std::vector<std::uint8_t> bytes(address_bytes(n), 0);
  auto set_bit = [&](std::size_t i) { bytes[bytes.size() - 1 - i / 8] |= std::uint8_t(1u << (i % 8)); };
  for (std::size_t q = 0; q < n; ++q) {
    if (key.x(q)) set_bit(q);
    if (key.z(q)) set_bit(n + q);
  }
  return PauliAddress::from_bytes(bytes);
}

PauliKey decode_address(const PauliAddress& address, std::size_t n) {
  if (address.bit_width() > 2 * n) {
    throw std::out_of_range("address exceeds 2n bits");
  }
  PauliKey key(n);
  for (std::size_t q = 0; q < n; ++q) {
    key.set(q, address.bit(n + q), address.bit(q));
  }
  return key;
}

// ---------------------------------------------------------------------------
// Algebra

PauliProduct multiply(const PauliKey& p, const PauliKey& q) {
  require_same_n(p, q);
  PauliProduct out{PauliKey(p.num_qubits()), 0};
  const auto pz = p.z_words(), px = p.x_words();
  const auto qz = q.z_words(), qx = q.x_words();
  auto oz = out.key.z_words();
  auto ox = out.key.x_words();
  int plus = 0;
  int minus = 0;
  for (std::size_t i = 0; i < pz.size(); ++i) {
    const auto a_x = px[i] & ~pz[i], a_y = px[i] & pz[i], a_z = ~px[i] & pz[i];
    const auto b_x = qx[i] & ~qz[i], b_y = qx[i] & qz[i], b_z = ~qx[i] & qz[i];
    // XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
    plus += std::popcount((a_x & b_y) | (a_y & b_z) | (a_z & b_x));
    minus += std::popcount((a_y & b_x) | (a_z & b_y) | (a_x & b_z));
    oz[i] = pz[i] ^ qz[i];
    ox[i] = px[i] ^ qx[i];
  }
  out.phase = ((plus - minus) % 4 + 4) % 4;
  return out;
}

bool commutes(const PauliKey& p, const PauliKey& q) {
  require_same_n(p, q);
  const auto pz = p.z_words(), px = p.x_words();
  const auto qz = q.z_words(), qx = q.x_words();
  int parity = 0;
  for (std::size_t i = 0; i < pz.size(); ++i) {
    parity ^= std::popcount((pz[i] & qx[i]) ^ (px[i] & qz[i])) & 1;
  }
  return parity == 0;
}

bool qubitwise_commutes(const PauliKey& p, const PauliKey& q) {
  require_same_n(p, q);
  const auto pz = p.z_words(), px = p.x_words();
  const auto qz = q.z_words(), qx = q.x_words();
  for (std::size_t i = 0; i < pz.size(); ++i) {
    const auto both = (pz[i] | px[i]) & (qz[i] | qx[i]);
    if (((pz[i] ^ qz[i]) | (px[i] ^ qx[i])) & both) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// PauliSum

PauliSum PauliSum::from_terms(std::size_t n, std::span<const PauliTerm> terms) {
  PauliSum s(n);
  s.reserve(terms.size());
  for (const auto& t : terms) s.add(t.key, t.coeff);
  return s;
}

PauliSum PauliSum::single(const PauliKey& key, double coeff) {
  PauliSum s(key.num_qubits());
  s.add(key, coeff);
  return s;
}

void PauliSum::check_key(const PauliKey& key) const {
  if (key.num_qubits() != n_) {
    throw std::invalid_argument("Pauli on " + std::to_string(key.num_qubits()) +
                                " qubits added to a sum on " + std::to_string(n_));
  }
}

void PauliSum::add(const PauliKey& key, double coeff) {
  check_key(key);
  if (!std::isfinite(coeff)) {
    throw std::invalid_argument("non-finite Pauli coefficient");
  }
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(key, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void PauliSum::insert_new(PauliKey key, double coeff) {
  if (coeff == 0.0) return;
  terms_.emplace(std::move(key), coeff);
}

double PauliSum::coeff(const PauliKey& key) const {
  auto it = terms_.find(key);
  return it == terms_.end() ? 0.0 : it->second;
}

std::vector<PauliTerm> PauliSum::sorted_terms() const {
  std::vector<PauliTerm> out;
  out.reserve(terms_.size());
  for (const auto& [k, c] : terms_) out.push_back({k, c});
  std::sort(out.begin(), out.end(), [](const PauliTerm& a, const PauliTerm& b) { return a.key < b.key; });
  return out;
}

double l1_norm(const PauliSum& s) {
  double acc = 0.0;
  for (const auto& [k, c] : s) acc += std::abs(c);
  return acc;
}

double l2_norm(const PauliSum& s) {
  double acc = 0.0;
  for (const auto& [k, c] : s) acc += c * c;
  return std::sqrt(acc);
}

void merge_into(PauliSum& into, const PauliSum& other) {
  if (into.num_qubits() != other.num_qubits()) {
    throw std::invalid_argument("cannot merge Pauli sums on different qubit counts");
  }
  for (const auto& [k, c] : other) into.add(k, c);
}

PauliSum merge(const PauliSum& a, const PauliSum& b) {
  PauliSum out = a;
  merge_into(out, b);
  return out;
}

}  // namespace obp
