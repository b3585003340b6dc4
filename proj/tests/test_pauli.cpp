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

#include <algorithm>

#include "obp/pauli.hpp"
#include "support.hpp"

namespace obp {
namespace {

using test::Rng;

TEST(PauliKey, StringRoundTrip) {
  const PauliKey k = PauliKey::from_string("IXYZ");
  EXPECT_EQ(k.num_qubits(), 4u);
  EXPECT_EQ(k.str(), "IXYZ");
  EXPECT_EQ(k.at(0), 'I');
  EXPECT_EQ(k.at(2), 'Y');
  EXPECT_EQ(k.weight(), 3u);
  EXPECT_EQ(k.support(), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_TRUE(PauliKey(5).is_identity());
}

TEST(PauliKey, SymplecticBits) {
  PauliKey k(3);
  k.set(0, 'X');
  k.set(1, 'Y');
  k.set(2, 'Z');
  EXPECT_FALSE(k.z(0));
  EXPECT_TRUE(k.x(0));
  EXPECT_TRUE(k.z(1));
  EXPECT_TRUE(k.x(1));
  EXPECT_TRUE(k.z(2));
  EXPECT_FALSE(k.x(2));
}

TEST(PauliKey, RejectsBadInput) {
  EXPECT_THROW(PauliKey::from_string(""), std::invalid_argument);
  EXPECT_THROW(PauliKey::from_string("XQ"), std::invalid_argument);
  PauliKey k(2);
  EXPECT_THROW(k.set(2, 'X'), std::out_of_range);
}

TEST(PauliKey, MultiWordKeys) {
  PauliKey k(130);
  k.set(0, 'X');
  k.set(64, 'Y');
  k.set(129, 'Z');
  EXPECT_EQ(k.num_words(), 3u);
  EXPECT_EQ(k.weight(), 3u);
  EXPECT_EQ(PauliKey::from_string(k.str()), k);
}

TEST(PauliProduct, MatchesMatrices) {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 3;
    const PauliKey p = test::random_key(rng, n), q = test::random_key(rng, n);
    const PauliProduct pq = multiply(p, q);
    const std::size_t dim = std::size_t{1} << n;
    const auto lhs = test::matmul(test::kron_pauli(p), test::kron_pauli(q), dim);
    const auto rhs = test::kron_pauli(pq.key);
    const std::complex<double> phase[4] = {1.0, {0, 1}, -1.0, {0, -1}};
    for (std::size_t i = 0; i < dim * dim; ++i) {
      ASSERT_NEAR(std::abs(lhs[i] - phase[pq.phase] * rhs[i]), 0.0, 1e-14)
          << p.str() << " * " << q.str();
    }
    const auto qp = test::matmul(test::kron_pauli(q), test::kron_pauli(p), dim);
    bool same = true;
    for (std::size_t i = 0; i < dim * dim; ++i) same = same && std::abs(lhs[i] - qp[i]) < 1e-14;
    EXPECT_EQ(commutes(p, q), same);
  }
}

TEST(PauliProduct, QubitwiseCommutation) {
  EXPECT_TRUE(qubitwise_commutes(PauliKey::from_string("XIZ"), PauliKey::from_string("XYI")));
  EXPECT_FALSE(qubitwise_commutes(PauliKey::from_string("XX"), PauliKey::from_string("YY")));
  EXPECT_TRUE(commutes(PauliKey::from_string("XX"), PauliKey::from_string("YY")));
}

TEST(PauliAddress, ExhaustiveOrderMatchesAddress) {
  const std::size_t n = 3;
  std::vector<PauliKey> keys;
  for (std::uint64_t a = 0; a < 64; ++a) {
    const PauliKey k = decode_address(PauliAddress(a), n);
    EXPECT_EQ(encode_address(k), PauliAddress(a));
    keys.push_back(k);
  }
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  // z * 2^n + x: Z on qubit 0 sits above every X pattern.
  EXPECT_EQ(encode_address(PauliKey::from_string("ZII")), PauliAddress(8));
  EXPECT_EQ(encode_address(PauliKey::from_string("XII")), PauliAddress(1));
  EXPECT_EQ(encode_address(PauliKey::from_string("YII")), PauliAddress(9));
}

TEST(PauliAddress, WideKeysRoundTripAndOrder) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const PauliKey a = test::random_key(rng, 75), b = test::random_key(rng, 75);
    EXPECT_EQ(decode_address(encode_address(a), 75), a);
    EXPECT_EQ(a < b, encode_address(a) < encode_address(b));
    const auto bytes = encode_address(a).to_bytes(address_bytes(75));
    EXPECT_EQ(bytes.size(), 19u);
    EXPECT_EQ(PauliAddress::from_bytes(bytes), encode_address(a));
  }
}

TEST(PauliAddress, Arithmetic) {
  EXPECT_EQ(PauliAddress::space_end(4), PauliAddress(256));
  EXPECT_EQ(PauliAddress::fraction_of_space(4, 1, 4), PauliAddress(64));
  EXPECT_EQ(PauliAddress::fraction_of_space(4, 1, 3), PauliAddress(85));
  EXPECT_EQ(PauliAddress(255).plus_one(), PauliAddress(256));
  EXPECT_EQ(PauliAddress(256).minus_one(), PauliAddress(255));
  EXPECT_THROW(PauliAddress().minus_one(), std::domain_error);
  const PauliAddress big = PauliAddress::space_end(40);  // 2^80
  EXPECT_EQ(big.bit_width(), 81u);
  EXPECT_EQ(big.minus_one().plus_one(), big);
  EXPECT_EQ(big.minus_one().bit_width(), 80u);
  EXPECT_EQ(PauliAddress(0x1234).to_bytes(3), (std::vector<std::uint8_t>{0x00, 0x12, 0x34}));
  EXPECT_EQ(PauliAddress(0x1234).hex(), "1234");
}

TEST(PauliSum, AddMergesAndDropsZeros) {
  PauliSum s(2);
  const PauliKey xx = PauliKey::from_string("XX");
  s.add(xx, 0.5);
  s.add(xx, 0.25);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s.coeff(xx), 0.75);
  s.add(xx, -0.75);
  EXPECT_TRUE(s.empty());
  EXPECT_THROW(s.add(PauliKey::from_string("XXX"), 1.0), std::invalid_argument);
}

TEST(PauliSum, NormsAndOrder) {
  const std::vector<PauliTerm> terms{{PauliKey::from_string("ZI"), -3.0},
                                     {PauliKey::from_string("IX"), 4.0}};
  const PauliSum s = PauliSum::from_terms(2, terms);
  EXPECT_DOUBLE_EQ(l1_norm(s), 7.0);
  EXPECT_DOUBLE_EQ(l2_norm(s), 5.0);
  const auto sorted = s.sorted_terms();
  EXPECT_EQ(sorted.front().key.str(), "IX");
  const PauliSum m = merge(s, PauliSum::single(PauliKey::from_string("ZI"), 3.0));
  EXPECT_EQ(m.size(), 1u);
}

}  // namespace
}  // namespace obp
