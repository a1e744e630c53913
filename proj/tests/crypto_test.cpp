/*
 * Copyright 2026 The gmk Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "doctest.h"
#include "gmk/crypto.hpp"
#include "helpers.hpp"

using namespace gmk;
using namespace gmk::crypto;
using gmk::testing::category_of;

namespace {

const AdditiveKeypair& additive_keys() {
  static const AdditiveKeypair keys = [] {
    CryptoRng rng(101);
    return additive_keygen(128, rng);
  }();
  return keys;
}

const MultiplicativeKeypair& mult_keys() {
  static const MultiplicativeKeypair keys = [] {
    CryptoRng rng(102);
    return mult_keygen(258, rng);
  }();
  return keys;
}

mpz_class signed_below(CryptoRng& rng, const mpz_class& bound) {
  return rng.below(mpz_class(2 * bound + 1)) - bound;
}

}  // namespace

TEST_CASE("additive scheme: small identities") {
  const auto& [pk, sk] = additive_keys();
  CryptoRng rng(1);
  const auto five = additive_encrypt(pk, 5, rng);
  const auto three = additive_encrypt(pk, 3, rng);
  CHECK(additive_decrypt(sk, additive_add(pk, five, three)) == 8);
  const auto seven = additive_encrypt_signed(pk, 7, rng);
  CHECK(additive_decrypt_signed(sk, additive_scalar_mul(pk, seven, -1)) == -7);
  CHECK(additive_decrypt_signed(sk, additive_encrypt_signed(pk, -12345, rng)) == -12345);
  CHECK(pk.bits == 128);
  CHECK(mpz_sizeinbase(pk.n.get_mpz_t(), 2) == 128);
}

TEST_CASE("additive scheme: fresh randomness and plaintext range") {
  const auto& [pk, sk] = additive_keys();
  CryptoRng rng(2);
  CHECK_FALSE(additive_encrypt(pk, 42, rng) == additive_encrypt(pk, 42, rng));
  CHECK(category_of([&] { additive_encrypt(pk, pk.n, rng); }) == ErrorCategory::kPlaintextRange);
  CHECK(category_of([&] { additive_encrypt(pk, -1, rng); }) == ErrorCategory::kPlaintextRange);
  CHECK(category_of([&] { encode_signed(pk.n, pk.n); }) == ErrorCategory::kPlaintextRange);
  CHECK(decode_signed(encode_signed(pk.n / 2, pk.n), pk.n) == pk.n / 2);
  CHECK(category_of([&] { CryptoRng r(3); additive_keygen(32, r); }) == ErrorCategory::kConfig);
}

TEST_CASE("additive scheme: randomized homomorphic identities") {
  const auto& [pk, sk] = additive_keys();
  CryptoRng rng(4);
  const mpz_class bound = pk.n / 4;
  for (int trial = 0; trial < 200; ++trial) {
    const mpz_class a = rng.below(pk.n);
    const mpz_class b = rng.below(pk.n);
    const mpz_class k = signed_below(rng, bound);
    const auto ca = additive_encrypt(pk, a, rng);
    const auto cb = additive_encrypt(pk, b, rng);
    CHECK(additive_decrypt(sk, additive_add(pk, ca, cb)) == mpz_class((a + b) % pk.n));
    mpz_class expected = (k * a) % pk.n;
    if (expected < 0) expected += pk.n;
    CHECK(additive_decrypt(sk, additive_scalar_mul(pk, ca, k)) == expected);
  }
}

TEST_CASE("multiplicative scheme: products and rerandomization") {
  const auto& [pk, sk] = mult_keys();
  CryptoRng rng(5);
  const auto four = mult_encrypt(pk, 4, rng);
  const auto six = mult_encrypt(pk, 6, rng);
  CHECK(mult_decrypt(sk, mult_multiply(pk, four, six)) == 24);

  const auto one = mult_encrypt(pk, 1, rng);
  const auto fresh = mult_rerandomize_by_one(pk, one, rng);
  CHECK(mult_decrypt(sk, fresh) == 1);
  CHECK_FALSE(fresh == one);

  for (int trial = 0; trial < 200; ++trial) {
    const mpz_class a = 1 + rng.below(mpz_class(pk.p - 1));
    const mpz_class b = 1 + rng.below(mpz_class(pk.p - 1));
    const auto ca = mult_encrypt(pk, a, rng);
    CHECK(mult_decrypt(sk, mult_multiply(pk, ca, mult_encrypt(pk, b, rng))) ==
          mpz_class((a * b) % pk.p));
    const auto re = mult_rerandomize_by_one(pk, ca, rng);
    CHECK(mult_decrypt(sk, re) == a);
    CHECK(to_bytes(re.c1) != to_bytes(ca.c1));
  }
  CHECK(category_of([&] { mult_encrypt(pk, 0, rng); }) == ErrorCategory::kPlaintextRange);
  CHECK(category_of([&] { mult_encrypt(pk, pk.p, rng); }) == ErrorCategory::kPlaintextRange);
}

TEST_CASE("multiplicative key is a safe-prime group") {
  const auto& [pk, sk] = mult_keys();
  CHECK(pk.p == 2 * pk.q + 1);
  CHECK(mpz_probab_prime_p(pk.p.get_mpz_t(), 30) > 0);
  CHECK(mpz_probab_prime_p(pk.q.get_mpz_t(), 30) > 0);
  mpz_class order_check;
  mpz_powm(order_check.get_mpz_t(), pk.g.get_mpz_t(), pk.q.get_mpz_t(), pk.p.get_mpz_t());
  CHECK(order_check == 1);
  CHECK(pk.g != 1);
  CHECK(sk.x > 0);
}

TEST_CASE("byte conversion round-trips big-endian magnitudes") {
  CHECK(to_bytes(0).empty());
  CHECK(to_bytes(0x0102).size() == 2);
  CHECK(to_bytes(0x0102)[0] == 0x01);
  CryptoRng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const mpz_class v = rng.exact_bits(1 + static_cast<unsigned>(rng.below(std::uint64_t{300})));
    const auto bytes = to_bytes(v);
    CHECK(from_bytes(bytes.data(), bytes.size()) == v);
  }
}

TEST_CASE("CryptoRng is deterministic per seed") {
  CryptoRng a(9), b(9), c(10);
  const mpz_class bound("1000000000000000000000000");
  const mpz_class x = a.below(bound);
  CHECK(x == b.below(bound));
  CHECK(a.below(std::uint64_t{1000}) == b.below(std::uint64_t{1000}));
  CHECK(c.below(bound) != x);
}
