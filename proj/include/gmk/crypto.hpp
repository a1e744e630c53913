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

#pragma once

#include <cstdint>
#include <vector>

#include <gmpxx.h>

namespace gmk::crypto {

// Deterministic randomness for key generation and encryption. Small draws
// (masks, permutations) and big-integer draws come from separate streams.
class CryptoRng {
 public:
  explicit CryptoRng(std::uint64_t seed);

  // Uniform in [0, bound).
  mpz_class below(const mpz_class& bound);
  // Uniform integer with exactly `bits` bits (top bit set).
  mpz_class exact_bits(unsigned bits);
  std::uint64_t below(std::uint64_t bound);

 private:
  gmp_randclass big_;
  std::uint64_t small_state_;
};

// Paillier, g = n + 1.
struct AdditivePublicKey {
  mpz_class n;
  mpz_class n_squared;
  unsigned bits = 0;
};

struct AdditiveSecretKey {
  AdditivePublicKey pub;
  mpz_class lambda;  // lcm(p - 1, q - 1)
  mpz_class mu;      // lambda^-1 mod n
};

struct AdditiveKeypair {
  AdditivePublicKey pk;
  AdditiveSecretKey sk;
};

struct AdditiveCiphertext {
  mpz_class value;
  friend bool operator==(const AdditiveCiphertext& a, const AdditiveCiphertext& b) {
    return a.value == b.value;
  }
};

inline constexpr unsigned kMinAdditiveBits = 64;

AdditiveKeypair additive_keygen(unsigned bits, CryptoRng& rng);
// Plaintext residue in [0, n).
AdditiveCiphertext additive_encrypt(const AdditivePublicKey& pk, const mpz_class& plaintext,
                                    CryptoRng& rng);
// Signed plaintext x with x in (-n/2, n/2], stored as x mod n.
AdditiveCiphertext additive_encrypt_signed(const AdditivePublicKey& pk, const mpz_class& x,
                                           CryptoRng& rng);
mpz_class additive_decrypt(const AdditiveSecretKey& sk, const AdditiveCiphertext& c);
mpz_class additive_decrypt_signed(const AdditiveSecretKey& sk, const AdditiveCiphertext& c);
AdditiveCiphertext additive_add(const AdditivePublicKey& pk, const AdditiveCiphertext& a,
                                const AdditiveCiphertext& b);
// Encrypts k * a mod n; k may be negative.
AdditiveCiphertext additive_scalar_mul(const AdditivePublicKey& pk,
                                       const AdditiveCiphertext& c, const mpz_class& k);

mpz_class encode_signed(const mpz_class& x, const mpz_class& modulus);
mpz_class decode_signed(const mpz_class& residue, const mpz_class& modulus);

// ElGamal over Z_p^*, p = 2q + 1 a safe prime, g generating the order-q subgroup.
struct MultiplicativePublicKey {
  mpz_class p;
  mpz_class q;
  mpz_class g;
  mpz_class h;  // g^x
  unsigned bits = 0;
};

struct MultiplicativeSecretKey {
  MultiplicativePublicKey pub;
  mpz_class x;
};

struct MultiplicativeKeypair {
  MultiplicativePublicKey pk;
  MultiplicativeSecretKey sk;
};

struct MultiplicativeCiphertext {
  mpz_class c1;
  mpz_class c2;
  friend bool operator==(const MultiplicativeCiphertext& a,
                         const MultiplicativeCiphertext& b) {
    return a.c1 == b.c1 && a.c2 == b.c2;
  }
};

MultiplicativeKeypair mult_keygen(unsigned bits, CryptoRng& rng);
// Plaintext in [1, p).
MultiplicativeCiphertext mult_encrypt(const MultiplicativePublicKey& pk, const mpz_class& m,
                                      CryptoRng& rng);
mpz_class mult_decrypt(const MultiplicativeSecretKey& sk, const MultiplicativeCiphertext& c);
MultiplicativeCiphertext mult_multiply(const MultiplicativePublicKey& pk,
                                       const MultiplicativeCiphertext& a,
                                       const MultiplicativeCiphertext& b);
// Multiplies by a fresh encryption of 1: same plaintext, new ciphertext.
MultiplicativeCiphertext mult_rerandomize_by_one(const MultiplicativePublicKey& pk,
                                                 const MultiplicativeCiphertext& c,
                                                 CryptoRng& rng);

// Big-endian magnitude bytes (empty for zero).
std::vector<std::uint8_t> to_bytes(const mpz_class& magnitude);
mpz_class from_bytes(const std::uint8_t* data, std::size_t size);

}  // namespace gmk::crypto
