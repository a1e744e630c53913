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
#include <deque>
#include <filesystem>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "gmk/core.hpp"
#include "gmk/crypto.hpp"
#include "gmk/learning.hpp"

namespace gmk::protocol {

using crypto::AdditiveCiphertext;
using crypto::MultiplicativeCiphertext;

struct SecurityParams {
  unsigned additive_bits = 128;
  // 0 selects 2 * additive_bits + 2, which embeds a whole additive ciphertext
  // in one multiplicative plaintext. Smaller values split it into limbs.
  unsigned multiplicative_bits = 0;
  std::int64_t mask_a_max = std::int64_t{1} << 16;
  std::int64_t mask_b_max = std::int64_t{1} << 32;

  unsigned effective_multiplicative_bits() const;
};

// How an additive ciphertext (< n^2) is split into multiplicative plaintexts:
// limb j holds bits [j*w, (j+1)*w) plus one, so every limb is nonzero.
struct LimbSchedule {
  unsigned limb_bits = 0;
  std::size_t limbs = 0;
};

LimbSchedule limb_schedule(const crypto::AdditivePublicKey& pk_u,
                           const crypto::MultiplicativePublicKey& pk_s);

// E(e(x)): one multiplicative ciphertext per limb.
struct DoubleCiphertext {
  std::vector<MultiplicativeCiphertext> limbs;
};

struct MaskPair {
  std::int64_t a = 1;  // nonzero
  std::int64_t b = 0;
};

struct ProtocolDecision {
  bool accept = false;
};

enum class Party : std::uint8_t { kClient = 0, kServer = 1 };

// Round-by-round payload kinds.
enum class PayloadKind : std::uint8_t {
  kEncryptedQuery = 1,
  kDoubleEncryptedCorrelations = 2,
  kPermutedRerandomized = 3,
  kBlindedAffine = 4,
  kMaskedValues = 5,
};

// Wire message: header {round u8, sender u8, count u32 BE}, then `count`
// payloads, each {length u32 BE, sign u8, big-endian magnitude}. The length
// covers the sign byte and the magnitude.
struct Message {
  std::uint8_t round = 0;
  Party sender = Party::kClient;
  std::vector<mpz_class> payloads;

  std::vector<std::uint8_t> serialize() const;
  // Parses one message starting at `offset`, advancing it.
  static Message parse(std::span<const std::uint8_t> bytes, std::size_t& offset);
};

struct TranscriptEntry {
  Party sender = Party::kClient;
  std::uint8_t round = 0;
  PayloadKind kind = PayloadKind::kEncryptedQuery;
  std::vector<std::uint8_t> bytes;  // full wire message

  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

struct ProtocolTranscript {
  std::vector<TranscriptEntry> messages;

  // File form: the wire messages back to back.
  void save(const std::filesystem::path& path) const;
  static ProtocolTranscript load(const std::filesystem::path& path);
  static ProtocolTranscript from_bytes(std::span<const std::uint8_t> bytes);
  std::vector<std::uint8_t> to_bytes() const;

  friend bool operator==(const ProtocolTranscript&, const ProtocolTranscript&) = default;
};

// In-process duplex channel; each side only sees what the other sent.
class DuplexChannel {
 public:
  void send(Party from, std::vector<std::uint8_t> bytes);
  std::vector<std::uint8_t> receive(Party to);

 private:
  std::deque<std::vector<std::uint8_t>> to_client_;
  std::deque<std::vector<std::uint8_t>> to_server_;
};

// ---- Protocol steps ----

// All l components encrypted, zeros included.
std::vector<AdditiveCiphertext> client_round1_encrypt_query(
    const TernaryCode& query, const crypto::AdditivePublicKey& pk_u, crypto::CryptoRng& rng);

// e(p^T r_g) = prod_{i: r_g(i) != 0} e(p(i))^{r_g(i)}, wrapped in E(.).
std::vector<DoubleCiphertext> server_round2_encrypted_correlations(
    std::span<const AdditiveCiphertext> encrypted_query,
    const GroupRepresentations& representations, const crypto::AdditivePublicKey& pk_u,
    const crypto::MultiplicativePublicKey& pk_s, crypto::CryptoRng& rng);

struct PermutedList {
  std::vector<DoubleCiphertext> ciphertexts;
  std::vector<std::size_t> permutation;  // output k holds input permutation[k]
};

PermutedList client_round3_mask_permute(std::span<const DoubleCiphertext> correlations,
                                        const crypto::MultiplicativePublicKey& pk_s,
                                        crypto::CryptoRng& rng);

// Strips the outer layer and returns e(a_k (2S - 2 c_k - tau) + b_k).
std::vector<AdditiveCiphertext> server_round4_blind_threshold(
    std::span<const DoubleCiphertext> permuted, const crypto::MultiplicativeSecretKey& sk_s,
    const crypto::AdditivePublicKey& pk_u, std::int64_t tau, int sparsity,
    std::span<const MaskPair> masks, const SecurityParams& params, crypto::CryptoRng& rng);

std::vector<mpz_class> client_round5_decrypt_reveal(std::span<const AdditiveCiphertext> blinded,
                                                    const crypto::AdditiveSecretKey& sk_u);

// Accepts iff some (v_k - b_k) / a_k <= 0.
ProtocolDecision server_decide(std::span<const mpz_class> values,
                               std::span<const MaskPair> masks, std::int64_t tau);

std::vector<mpz_class> unmask(std::span<const mpz_class> values,
                              std::span<const MaskPair> masks);

std::vector<MaskPair> draw_masks(std::size_t count, const SecurityParams& params,
                                 crypto::CryptoRng& rng);

// ---- Parties ----

class Client {
 public:
  Client(TernaryCode query, crypto::AdditiveKeypair keys,
         crypto::MultiplicativePublicKey pk_s, std::uint64_t seed);

  Message round1();
  Message round3(const Message& correlations);
  Message round5(const Message& blinded);

  const std::vector<std::size_t>& permutation() const { return permutation_; }

 private:
  TernaryCode query_;
  crypto::AdditiveKeypair keys_;
  crypto::MultiplicativePublicKey pk_s_;
  crypto::CryptoRng rng_;
  std::vector<std::size_t> permutation_;
};

class Server {
 public:
  Server(GroupRepresentations representations, std::int64_t tau, SecurityParams params,
         crypto::MultiplicativeKeypair keys, crypto::AdditivePublicKey pk_u,
         std::uint64_t seed);

  Message round2(const Message& encrypted_query);
  Message round4(const Message& permuted);
  ProtocolDecision decide(const Message& revealed);

  const std::vector<MaskPair>& masks() const { return masks_; }
  const std::vector<mpz_class>& unmasked() const { return unmasked_; }

 private:
  GroupRepresentations representations_;
  std::int64_t tau_;
  SecurityParams params_;
  crypto::MultiplicativeKeypair keys_;
  crypto::AdditivePublicKey pk_u_;
  crypto::CryptoRng rng_;
  std::vector<MaskPair> masks_;
  std::vector<mpz_class> unmasked_;
};

struct ProtocolKeys {
  crypto::AdditiveKeypair client;
  crypto::MultiplicativeKeypair server;
};

ProtocolKeys generate_keys(const SecurityParams& params, std::uint64_t seed);

struct ProtocolRun {
  ProtocolDecision decision;
  ProtocolTranscript transcript;
  // Observability for tests; none of this crosses the channel.
  std::vector<mpz_class> revealed;
  std::vector<MaskPair> masks;
  std::vector<std::size_t> permutation;
  std::vector<mpz_class> unmasked;
};

ProtocolRun run_protocol(const TernaryCode& query, const GroupRepresentations& representations,
                         std::int64_t tau, const ProtocolKeys& keys,
                         const SecurityParams& params, std::uint64_t seed);

// Generates fresh keys from `seed` first.
ProtocolRun run_protocol(const TernaryCode& query, const GroupRepresentations& representations,
                         std::int64_t tau, const SecurityParams& params, std::uint64_t seed);

// Plaintext rule the protocol must reproduce: exists g with ||p - r_g||^2 <= tau.
bool plaintext_decision(const TernaryCode& query, const GroupRepresentations& representations,
                        std::int64_t tau);

}  // namespace gmk::protocol
