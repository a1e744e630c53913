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

#include <algorithm>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "gmk/learning.hpp"
#include "gmk/protocol.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace gmk;
using namespace gmk::protocol;
using gmk::crypto::CryptoRng;
using gmk::testing::category_of;
using gmk::testing::code;

namespace {

const ProtocolKeys& keys() {
  static const ProtocolKeys k = generate_keys(SecurityParams{}, 77);
  return k;
}

GroupRepresentations random_reps(Index length, int groups, int sparsity, Rng& rng) {
  std::vector<TernaryCode> out;
  for (int g = 0; g < groups; ++g) out.push_back(testing::random_code(length, sparsity, rng));
  return GroupRepresentations(std::move(out));
}

std::set<std::vector<std::uint8_t>> payload_bytes(const TranscriptEntry& entry) {
  std::size_t offset = 0;
  const Message m = Message::parse(entry.bytes, offset);
  std::set<std::vector<std::uint8_t>> out;
  for (const auto& p : m.payloads) out.insert(crypto::to_bytes(p));
  return out;
}

}  // namespace

TEST_CASE("default parameters use a single limb") {
  const auto& k = keys();
  const LimbSchedule s = limb_schedule(k.client.pk, k.server.pk);
  CHECK(s.limbs == 1);
  CHECK(SecurityParams{}.effective_multiplicative_bits() == 258);
}

TEST_CASE("round 1 encrypts every component with fresh randomness") {
  const auto& k = keys();
  CryptoRng rng(1);
  const auto p = code({1, 0, -1, 0, 0, 1}, 3);
  const auto c1 = client_round1_encrypt_query(p, k.client.pk, rng);
  const auto c2 = client_round1_encrypt_query(p, k.client.pk, rng);
  REQUIRE(c1.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(crypto::additive_decrypt_signed(k.client.sk, c1[i]) == p[static_cast<Index>(i)]);
    CHECK_FALSE(c1[i] == c2[i]);
  }
}

namespace {

// Strips both layers of a round-2 list using the server's and client's keys.
std::vector<long> inner_values(const std::vector<DoubleCiphertext>& list, const ProtocolKeys& k) {
  std::vector<long> out;
  const auto schedule = limb_schedule(k.client.pk, k.server.pk);
  for (const auto& d : list) {
    mpz_class value = 0;
    for (std::size_t j = d.limbs.size(); j-- > 0;) {
      value <<= schedule.limb_bits;
      value += crypto::mult_decrypt(k.server.sk, d.limbs[j]) - 1;
    }
    out.push_back(
        crypto::additive_decrypt_signed(k.client.sk, crypto::AdditiveCiphertext{value}).get_si());
  }
  return out;
}

}  // namespace

TEST_CASE("round 2 computes every correlation under both layers") {
  const auto& k = keys();
  CryptoRng rng(2);
  Rng prng(2);
  const auto p = testing::random_code(16, 4, prng);
  std::vector<TernaryCode> reps = {p, code({0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1}, 4)};
  for (int g = 0; g < 6; ++g) reps.push_back(testing::random_code(16, 4, prng));
  const GroupRepresentations r(reps);
  const auto enc = client_round1_encrypt_query(p, k.client.pk, rng);
  const auto list = server_round2_encrypted_correlations(enc, r, k.client.pk, k.server.pk, rng);
  const auto values = inner_values(list, k);
  REQUIRE(values.size() == reps.size());
  CHECK(values[0] == 4);
  for (std::size_t g = 0; g < reps.size(); ++g) CHECK(values[g] == oracle::correlation(p, reps[g]));
}

TEST_CASE("round 3 permutes and rerandomizes") {
  const auto& k = keys();
  CryptoRng rng(3);
  Rng prng(3);
  const auto p = testing::random_code(12, 3, prng);
  const auto r = random_reps(12, 7, 3, prng);
  const auto enc = client_round1_encrypt_query(p, k.client.pk, rng);
  const auto list = server_round2_encrypted_correlations(enc, r, k.client.pk, k.server.pk, rng);
  const auto permuted = client_round3_mask_permute(list, k.server.pk, rng);

  auto sorted = permuted.permutation;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);

  const auto before = inner_values(list, k);
  const auto after = inner_values(permuted.ciphertexts, k);
  for (std::size_t j = 0; j < after.size(); ++j) {
    CHECK(after[j] == before[permuted.permutation[j]]);
    CHECK_FALSE(permuted.ciphertexts[j].limbs[0] == list[permuted.permutation[j]].limbs[0]);
  }

  const GroupRepresentations single({r.column(0)});
  const auto one = server_round2_encrypted_correlations(enc, single, k.client.pk, k.server.pk, rng);
  const auto kept = client_round3_mask_permute(one, k.server.pk, rng);
  CHECK(kept.permutation == std::vector<std::size_t>{0});
  CHECK_FALSE(kept.ciphertexts[0].limbs[0] == one[0].limbs[0]);
}

TEST_CASE("round 4 applies the affine blind and round 5 reveals it") {
  const auto& k = keys();
  CryptoRng rng(4);
  const SecurityParams params;
  const int s = 3;
  const auto p = code({1, 1, 1, 0, 0, 0}, s);
  const GroupRepresentations r({p, code({0, 0, 0, 1, -1, 1}, s), code({-1, 1, 0, 0, 0, -1}, s)});
  const auto enc = client_round1_encrypt_query(p, k.client.pk, rng);
  const auto list = server_round2_encrypted_correlations(enc, r, k.client.pk, k.server.pk, rng);

  // a = 1, b = 0, c = S, tau = 0 decrypts to zero.
  const std::vector<MaskPair> trivial = {{1, 0}, {1, 0}, {1, 0}};
  const auto out = server_round4_blind_threshold(list, k.server.sk, k.client.pk, 0, s, trivial,
                                                 params, rng);
  const auto revealed = client_round5_decrypt_reveal(out, k.client.sk);
  CHECK(revealed[0] == 0);

  // a = -2, b = 5, tau = 2S on the zero-correlation group.
  const std::vector<MaskPair> masks = {{3, -7}, {-2, 5}, {65536, 4294967296}};
  const std::int64_t tau = 2 * s;
  const auto blinded =
      server_round4_blind_threshold(list, k.server.sk, k.client.pk, tau, s, masks, params, rng);
  const auto values = client_round5_decrypt_reveal(blinded, k.client.sk);
  for (std::size_t g = 0; g < 3; ++g) {
    const long c = oracle::correlation(p, r.column(static_cast<Index>(g)));
    CHECK(values[g] == masks[g].a * (2 * s - 2 * c - tau) + masks[g].b);
  }
  CHECK(values[1] == -2 * (2 * s - 0 - 2 * s) + 5);

  CHECK(category_of([&] {
          server_round4_blind_threshold(list, k.server.sk, k.client.pk, 0, s,
                                        std::vector<MaskPair>{{0, 0}, {1, 0}, {1, 0}}, params, rng);
        }) == ErrorCategory::kMaskRange);
  // 2^62 * (4S + 1) does not fit below n/2 for a 64-bit modulus.
  SecurityParams wide = params;
  wide.additive_bits = 64;
  wide.mask_b_max = std::int64_t{1} << 62;
  wide.mask_a_max = std::int64_t{1} << 62;
  const auto small = generate_keys(wide, 12);
  CHECK(category_of([&] {
          server_round4_blind_threshold(list, k.server.sk, small.client.pk, 0, s, trivial, wide,
                                        rng);
        }) == ErrorCategory::kMaskRange);
}

TEST_CASE("server_decide unmasks and accepts on any nonpositive value") {
  const std::vector<MaskPair> masks = {{2, 1}, {-3, 4}};
  CHECK_FALSE(server_decide(std::vector<mpz_class>{2 * 5 + 1, -3 * 1 + 4}, masks, 0).accept);
  CHECK(server_decide(std::vector<mpz_class>{2 * 5 + 1, -3 * 0 + 4}, masks, 0).accept);
  CHECK(server_decide(std::vector<mpz_class>{2 * -4 + 1, -3 * 2 + 4}, masks, 0).accept);
  CHECK(category_of([&] { server_decide(std::vector<mpz_class>{2, 4}, masks, 0); }) ==
        ErrorCategory::kProtocolIntegrity);
}

TEST_CASE("draw_masks stays in range and never draws a zero scale") {
  CryptoRng rng(5);
  SecurityParams params;
  params.mask_a_max = 3;
  params.mask_b_max = 2;
  std::set<std::int64_t> a_seen, b_seen;
  for (const auto& m : draw_masks(2000, params, rng)) {
    CHECK(m.a != 0);
    a_seen.insert(m.a);
    b_seen.insert(m.b);
  }
  CHECK(a_seen == std::set<std::int64_t>{-3, -2, -1, 1, 2, 3});
  CHECK(b_seen == std::set<std::int64_t>{-2, -1, 0, 1, 2});
}

TEST_CASE("end-to-end protocol agrees with the plaintext rule") {
  const auto& k = keys();
  const SecurityParams params;
  Rng prng(6);
  const auto r = random_reps(16, 5, 4, prng);
  CHECK(run_protocol(r.column(3), r, 0, k, params, 1).decision.accept);
  CHECK_FALSE(run_protocol(r.column(3), r, -1, k, params, 2).decision.accept);
  for (std::uint64_t trial = 0; trial < 60; ++trial) {
    const auto p = testing::random_code(16, 4, prng);
    const auto tau = static_cast<std::int64_t>(uniform_below(prng, 18)) - 1;
    const auto run = run_protocol(p, r, tau, k, params, 100 + trial);
    CHECK(run.decision.accept == plaintext_decision(p, r, tau));
    // The unmasked values are the permuted distances minus tau.
    for (std::size_t j = 0; j < run.unmasked.size(); ++j)
      CHECK(run.unmasked[j] ==
            oracle::squared_distance(p, r.column(static_cast<Index>(run.permutation[j]))) - tau);
  }
  CHECK(category_of([&] { run_protocol(code({1, 0, 0}, 1), r, 0, k, params, 1); }) ==
        ErrorCategory::kDimensionMismatch);
}

TEST_CASE("transcript layout, rerandomization and replay") {
  const auto& k = keys();
  Rng prng(7);
  const auto r = random_reps(10, 4, 3, prng);
  const auto p = testing::random_code(10, 3, prng);
  const auto run = run_protocol(p, r, 4, k, SecurityParams{}, 9);
  REQUIRE(run.transcript.messages.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& m = run.transcript.messages[i];
    CHECK(m.round == i + 1);
    CHECK(m.sender == (i % 2 == 0 ? Party::kClient : Party::kServer));
    CHECK(static_cast<int>(m.kind) == static_cast<int>(i + 1));
    CHECK(m.bytes[0] == i + 1);
    const std::uint32_t count = (std::uint32_t{m.bytes[2]} << 24) | (std::uint32_t{m.bytes[3]} << 16) |
                                (std::uint32_t{m.bytes[4]} << 8) | m.bytes[5];
    CHECK(count == (i == 0 ? 10u : 4u * (i == 1 || i == 2 ? 2u : 1u)));
  }
  // Round 3 shares no ciphertext value with round 2.
  const auto r2 = payload_bytes(run.transcript.messages[1]);
  for (const auto& v : payload_bytes(run.transcript.messages[2])) CHECK(r2.count(v) == 0);

  const auto path = std::filesystem::temp_directory_path() / "gmk_transcript_test.bin";
  run.transcript.save(path);
  const auto loaded = ProtocolTranscript::load(path);
  CHECK(loaded == run.transcript);
  std::filesystem::remove(path);

  auto bytes = run.transcript.to_bytes();
  CHECK(ProtocolTranscript::from_bytes(bytes) == run.transcript);
  bytes.pop_back();
  CHECK(category_of([&] { ProtocolTranscript::from_bytes(bytes); }) == ErrorCategory::kParse);

  // Swapping the first two messages breaks round order.
  ProtocolTranscript swapped = run.transcript;
  std::swap(swapped.messages[0], swapped.messages[1]);
  CHECK(category_of([&] { ProtocolTranscript::from_bytes(swapped.to_bytes()); }) ==
        ErrorCategory::kParse);
}

TEST_CASE("runs are deterministic given the seed") {
  const auto& k = keys();
  Rng prng(8);
  const auto r = random_reps(10, 3, 3, prng);
  const auto p = testing::random_code(10, 3, prng);
  const auto a = run_protocol(p, r, 6, k, SecurityParams{}, 5);
  const auto b = run_protocol(p, r, 6, k, SecurityParams{}, 5);
  CHECK(a.transcript == b.transcript);
  CHECK(run_protocol(p, r, 6, SecurityParams{}, 5).transcript ==
        run_protocol(p, r, 6, SecurityParams{}, 5).transcript);
}

TEST_CASE("the server's view is symmetric under permuting the groups") {
  const auto& k = keys();
  Rng prng(9);
  const int groups = 6;
  const auto r = random_reps(12, groups, 3, prng);
  std::vector<TernaryCode> shuffled = r.columns();
  std::reverse(shuffled.begin(), shuffled.end());
  const GroupRepresentations r_perm(shuffled);
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const auto p = testing::random_code(12, 3, prng);
    const std::int64_t tau = static_cast<std::int64_t>(uniform_below(prng, 14));
    const auto a = run_protocol(p, r, tau, k, SecurityParams{}, 300 + trial);
    const auto b = run_protocol(p, r_perm, tau, k, SecurityParams{}, 300 + trial);
    CHECK(a.decision.accept == b.decision.accept);
    // Same multiset of unmasked values: the server cannot tell the orders apart.
    auto ua = a.unmasked, ub = b.unmasked;
    std::sort(ua.begin(), ua.end());
    std::sort(ub.begin(), ub.end());
    CHECK(ua == ub);
  }
}

TEST_CASE("a second limb is used when the outer modulus is small") {
  SecurityParams params;
  params.additive_bits = 64;
  params.multiplicative_bits = 72;
  const auto k = generate_keys(params, 11);
  const auto schedule = limb_schedule(k.client.pk, k.server.pk);
  CHECK(schedule.limbs == 2);
  Rng prng(10);
  const auto r = random_reps(8, 3, 2, prng);
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const auto p = testing::random_code(8, 2, prng);
    const std::int64_t tau = static_cast<std::int64_t>(uniform_below(prng, 9));
    params.mask_b_max = 1 << 20;
    CHECK(run_protocol(p, r, tau, k, params, trial).decision.accept ==
          plaintext_decision(p, r, tau));
  }
}
