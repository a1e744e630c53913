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

#include "gmk/crypto.hpp"

#include <string>

#include "gmk/error.hpp"
#include "gmk/random.hpp"

namespace gmk::crypto {

CryptoRng::CryptoRng(std::uint64_t seed)
    : big_(gmp_randinit_mt), small_state_(derive_seed(seed, 0x51)) {
  mpz_class s;
  mpz_import(s.get_mpz_t(), 1, 1, sizeof(seed), 0, 0, &seed);
  big_.seed(s);
}

mpz_class CryptoRng::below(const mpz_class& bound) { return big_.get_z_range(bound); }

mpz_class CryptoRng::exact_bits(unsigned bits) {
  mpz_class v = big_.get_z_bits(bits);
  mpz_setbit(v.get_mpz_t(), bits - 1);
  return v;
}

std::uint64_t CryptoRng::below(std::uint64_t bound) {
  // splitmix64 stream with rejection sampling.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  while (true) {
    const std::uint64_t draw = derive_seed(small_state_++, 0);
    if (draw < limit) return draw % bound;
  }
}

namespace {

mpz_class random_prime(unsigned bits, CryptoRng& rng) {
  while (true) {
    mpz_class candidate = rng.exact_bits(bits);
    mpz_nextprime(candidate.get_mpz_t(), candidate.get_mpz_t());
    if (mpz_sizeinbase(candidate.get_mpz_t(), 2) == bits) return candidate;
  }
}

mpz_class invert(const mpz_class& value, const mpz_class& modulus) {
  mpz_class out;
  if (mpz_invert(out.get_mpz_t(), value.get_mpz_t(), modulus.get_mpz_t()) == 0)
    fail(ErrorCategory::kProtocolIntegrity, "value is not invertible");
  return out;
}

mpz_class powm(const mpz_class& base, const mpz_class& exponent, const mpz_class& modulus) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exponent.get_mpz_t(), modulus.get_mpz_t());
  return out;
}

// Uniform unit in [1, modulus).
mpz_class random_unit(const mpz_class& modulus, CryptoRng& rng) {
  while (true) {
    mpz_class r = rng.below(modulus);
    if (r == 0) continue;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), modulus.get_mpz_t());
    if (g == 1) return r;
  }
}

}  // namespace

AdditiveKeypair additive_keygen(unsigned bits, CryptoRng& rng) {
  require(bits >= kMinAdditiveBits, ErrorCategory::kConfig,
          "additive modulus needs at least " + std::to_string(kMinAdditiveBits) + " bits");
  while (true) {
    const mpz_class p = random_prime(bits - bits / 2, rng);
    const mpz_class q = random_prime(bits / 2, rng);
    if (p == q) continue;
    const mpz_class n = p * q;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) != bits) continue;
    mpz_class lambda;
    const mpz_class pm1 = p - 1;
    const mpz_class qm1 = q - 1;
    mpz_lcm(lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), lambda.get_mpz_t(), n.get_mpz_t());
    if (g != 1) continue;
    AdditivePublicKey pk{n, n * n, bits};
    AdditiveSecretKey sk{pk, lambda, invert(lambda, n)};
    return {pk, sk};
  }
}

mpz_class encode_signed(const mpz_class& x, const mpz_class& modulus) {
  const mpz_class half = modulus / 2;
  require(x <= half && -x < modulus - half, ErrorCategory::kPlaintextRange,
          "signed plaintext outside the decodable window");
  mpz_class r = x % modulus;
  if (r < 0) r += modulus;
  return r;
}

mpz_class decode_signed(const mpz_class& residue, const mpz_class& modulus) {
  return residue > modulus / 2 ? mpz_class(residue - modulus) : residue;
}

AdditiveCiphertext additive_encrypt(const AdditivePublicKey& pk, const mpz_class& plaintext,
                                    CryptoRng& rng) {
  require(plaintext >= 0 && plaintext < pk.n, ErrorCategory::kPlaintextRange,
          "plaintext outside [0, n)");
  const mpz_class r = random_unit(pk.n, rng);
  mpz_class c = (1 + plaintext * pk.n) % pk.n_squared;
  c = (c * powm(r, pk.n, pk.n_squared)) % pk.n_squared;
  return {c};
}

AdditiveCiphertext additive_encrypt_signed(const AdditivePublicKey& pk, const mpz_class& x,
                                           CryptoRng& rng) {
  return additive_encrypt(pk, encode_signed(x, pk.n), rng);
}

mpz_class additive_decrypt(const AdditiveSecretKey& sk, const AdditiveCiphertext& c) {
  const auto& pk = sk.pub;
  require(c.value > 0 && c.value < pk.n_squared, ErrorCategory::kProtocolIntegrity,
          "ciphertext outside Z_{n^2}");
  const mpz_class u = powm(c.value, sk.lambda, pk.n_squared);
  const mpz_class l = (u - 1) / pk.n;
  return (l * sk.mu) % pk.n;
}

mpz_class additive_decrypt_signed(const AdditiveSecretKey& sk, const AdditiveCiphertext& c) {
  return decode_signed(additive_decrypt(sk, c), sk.pub.n);
}

AdditiveCiphertext additive_add(const AdditivePublicKey& pk, const AdditiveCiphertext& a,
                                const AdditiveCiphertext& b) {
  return {(a.value * b.value) % pk.n_squared};
}

AdditiveCiphertext additive_scalar_mul(const AdditivePublicKey& pk,
                                       const AdditiveCiphertext& c, const mpz_class& k) {
  mpz_class exponent = k % pk.n;
  if (exponent < 0) exponent += pk.n;
  return {powm(c.value, exponent, pk.n_squared)};
}

MultiplicativeKeypair mult_keygen(unsigned bits, CryptoRng& rng) {
  require(bits >= 16, ErrorCategory::kConfig, "multiplicative modulus too small");
  mpz_class q;
  mpz_class p;
  while (true) {
    q = random_prime(bits - 1, rng);
    p = 2 * q + 1;
    if (mpz_sizeinbase(p.get_mpz_t(), 2) == bits &&
        mpz_probab_prime_p(p.get_mpz_t(), 30) > 0)
      break;
  }
  mpz_class g;
  do {
    const mpz_class a = 2 + rng.below(mpz_class(p - 3));
    g = (a * a) % p;
  } while (g == 1);
  const mpz_class x = 1 + rng.below(mpz_class(q - 1));
  MultiplicativePublicKey pk{p, q, g, powm(g, x, p), bits};
  return {pk, MultiplicativeSecretKey{pk, x}};
}

MultiplicativeCiphertext mult_encrypt(const MultiplicativePublicKey& pk, const mpz_class& m,
                                      CryptoRng& rng) {
  require(m >= 1 && m < pk.p, ErrorCategory::kPlaintextRange,
          "multiplicative plaintext must lie in [1, p)");
  const mpz_class k = 1 + rng.below(mpz_class(pk.q - 1));
  return {powm(pk.g, k, pk.p), (m * powm(pk.h, k, pk.p)) % pk.p};
}

mpz_class mult_decrypt(const MultiplicativeSecretKey& sk, const MultiplicativeCiphertext& c) {
  const auto& pk = sk.pub;
  require(c.c1 > 0 && c.c1 < pk.p && c.c2 > 0 && c.c2 < pk.p,
          ErrorCategory::kProtocolIntegrity, "ciphertext outside Z_p^*");
  const mpz_class shared = powm(c.c1, sk.x, pk.p);
  return (c.c2 * invert(shared, pk.p)) % pk.p;
}

MultiplicativeCiphertext mult_multiply(const MultiplicativePublicKey& pk,
                                       const MultiplicativeCiphertext& a,
                                       const MultiplicativeCiphertext& b) {
  return {(a.c1 * b.c1) % pk.p, (a.c2 * b.c2) % pk.p};
}

MultiplicativeCiphertext mult_rerandomize_by_one(const MultiplicativePublicKey& pk,
                                                 const MultiplicativeCiphertext& c,
                                                 CryptoRng& rng) {
  return mult_multiply(pk, c, mult_encrypt(pk, 1, rng));
}

std::vector<std::uint8_t> to_bytes(const mpz_class& magnitude) {
  const std::size_t size = (mpz_sizeinbase(magnitude.get_mpz_t(), 2) + 7) / 8;
  std::vector<std::uint8_t> out(size);
  if (magnitude == 0) return {};
  std::size_t written = 0;
  mpz_export(out.data(), &written, 1, 1, 1, 0, magnitude.get_mpz_t());
  out.resize(written);
  return out;
}

mpz_class from_bytes(const std::uint8_t* data, std::size_t size) {
  mpz_class out;
  if (size > 0) mpz_import(out.get_mpz_t(), size, 1, 1, 1, 0, data);
  return out;
}

}  // namespace gmk::crypto
