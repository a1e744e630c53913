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

#include "gmk/protocol.hpp"

#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "gmk/error.hpp"
#include "gmk/random.hpp"

namespace gmk::protocol {

using namespace gmk::crypto;

unsigned SecurityParams::effective_multiplicative_bits() const {
  return multiplicative_bits != 0 ? multiplicative_bits : 2 * additive_bits + 2;
}

LimbSchedule limb_schedule(const AdditivePublicKey& pk_u, const MultiplicativePublicKey& pk_s) {
  // p has pk_s.bits bits, so p > 2^(bits-1) >= 2^w + 1 when w = bits - 2.
  require(pk_s.bits >= 3, ErrorCategory::kEmbeddingOverflow,
          "multiplicative modulus cannot hold any limb");
  const unsigned width = pk_s.bits - 2;
  const auto total = static_cast<unsigned>(mpz_sizeinbase(pk_u.n_squared.get_mpz_t(), 2));
  return {width, (total + width - 1) / width};
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t& offset) {
  require(offset + 4 <= bytes.size(), ErrorCategory::kParse, "truncated message");
  const std::uint32_t v = (std::uint32_t{bytes[offset]} << 24) |
                          (std::uint32_t{bytes[offset + 1]} << 16) |
                          (std::uint32_t{bytes[offset + 2]} << 8) |
                          std::uint32_t{bytes[offset + 3]};
  offset += 4;
  return v;
}

PayloadKind kind_of_round(std::uint8_t round) {
  require(round >= 1 && round <= 5, ErrorCategory::kParse,
          "round " + std::to_string(round) + " outside 1..5");
  return static_cast<PayloadKind>(round);
}

Party sender_of_round(std::uint8_t round) {
  return round % 2 == 1 ? Party::kClient : Party::kServer;
}

DoubleCiphertext wrap(const AdditiveCiphertext& inner, const LimbSchedule& schedule,
                      const MultiplicativePublicKey& pk_s, CryptoRng& rng) {
  DoubleCiphertext out;
  mpz_class rest = inner.value;
  for (std::size_t j = 0; j < schedule.limbs; ++j) {
    mpz_class limb;
    mpz_fdiv_r_2exp(limb.get_mpz_t(), rest.get_mpz_t(), schedule.limb_bits);
    mpz_fdiv_q_2exp(rest.get_mpz_t(), rest.get_mpz_t(), schedule.limb_bits);
    out.limbs.push_back(mult_encrypt(pk_s, limb + 1, rng));
  }
  require(rest == 0, ErrorCategory::kEmbeddingOverflow,
          "additive ciphertext does not fit the limb schedule");
  return out;
}

AdditiveCiphertext unwrap(const DoubleCiphertext& outer, const LimbSchedule& schedule,
                          const MultiplicativeSecretKey& sk_s, const AdditivePublicKey& pk_u) {
  require(outer.limbs.size() == schedule.limbs, ErrorCategory::kProtocolIntegrity,
          "wrong limb count");
  const mpz_class limit = mpz_class(1) << schedule.limb_bits;
  mpz_class value = 0;
  for (std::size_t j = outer.limbs.size(); j-- > 0;) {
    const mpz_class limb = mult_decrypt(sk_s, outer.limbs[j]) - 1;
    require(limb >= 0 && limb < limit, ErrorCategory::kProtocolIntegrity,
            "limb outside its range");
    value = (value << schedule.limb_bits) + limb;
  }
  require(value > 0 && value < pk_u.n_squared, ErrorCategory::kProtocolIntegrity,
          "unwrapped value is not an additive ciphertext");
  return {value};
}

std::vector<mpz_class> flatten(std::span<const DoubleCiphertext> list) {
  std::vector<mpz_class> out;
  for (const auto& item : list)
    for (const auto& limb : item.limbs) {
      out.push_back(limb.c1);
      out.push_back(limb.c2);
    }
  return out;
}

std::vector<DoubleCiphertext> unflatten(const std::vector<mpz_class>& payloads,
                                        std::size_t count, std::size_t limbs) {
  require(payloads.size() == count * limbs * 2, ErrorCategory::kProtocolIntegrity,
          "unexpected payload count");
  std::vector<DoubleCiphertext> out(count);
  std::size_t k = 0;
  for (auto& item : out)
    for (std::size_t j = 0; j < limbs; ++j, k += 2)
      item.limbs.push_back({payloads[k], payloads[k + 1]});
  return out;
}

std::vector<AdditiveCiphertext> as_additive(const std::vector<mpz_class>& payloads) {
  std::vector<AdditiveCiphertext> out;
  out.reserve(payloads.size());
  for (const auto& v : payloads) out.push_back({v});
  return out;
}

std::vector<mpz_class> as_payloads(std::span<const AdditiveCiphertext> list) {
  std::vector<mpz_class> out;
  out.reserve(list.size());
  for (const auto& c : list) out.push_back(c.value);
  return out;
}

void expect(const Message& message, std::uint8_t round) {
  require(message.round == round && message.sender == sender_of_round(round),
          ErrorCategory::kProtocolIntegrity,
          "expected round " + std::to_string(round) + ", got " +
              std::to_string(message.round));
}

mpz_class affine_bound(const SecurityParams& params, int sparsity, std::int64_t tau) {
  const mpz_class magnitude = mpz_class(4 * sparsity) + (tau < 0 ? -mpz_class(tau) : mpz_class(tau));
  return mpz_class(params.mask_a_max) * magnitude + mpz_class(params.mask_b_max);
}

}  // namespace

std::vector<std::uint8_t> Message::serialize() const {
  std::vector<std::uint8_t> out;
  out.push_back(round);
  out.push_back(static_cast<std::uint8_t>(sender));
  put_u32(out, static_cast<std::uint32_t>(payloads.size()));
  for (const auto& value : payloads) {
    const auto magnitude = crypto::to_bytes(abs(value));
    put_u32(out, static_cast<std::uint32_t>(magnitude.size() + 1));
    out.push_back(value < 0 ? 1 : 0);
    out.insert(out.end(), magnitude.begin(), magnitude.end());
  }
  return out;
}

Message Message::parse(std::span<const std::uint8_t> bytes, std::size_t& offset) {
  require(offset + 2 <= bytes.size(), ErrorCategory::kParse, "truncated message header");
  Message message;
  message.round = bytes[offset];
  const std::uint8_t sender = bytes[offset + 1];
  require(sender <= 1, ErrorCategory::kParse, "unknown sender");
  message.sender = static_cast<Party>(sender);
  offset += 2;
  const std::uint32_t count = get_u32(bytes, offset);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t length = get_u32(bytes, offset);
    require(length >= 1 && offset + length <= bytes.size(), ErrorCategory::kParse,
            "truncated payload");
    const std::uint8_t sign = bytes[offset];
    require(sign <= 1, ErrorCategory::kParse, "bad sign byte");
    mpz_class value = crypto::from_bytes(bytes.data() + offset + 1, length - 1);
    if (sign == 1) value = -value;
    message.payloads.push_back(std::move(value));
    offset += length;
  }
  return message;
}

std::vector<std::uint8_t> ProtocolTranscript::to_bytes() const {
  std::vector<std::uint8_t> out;
  for (const auto& m : messages) out.insert(out.end(), m.bytes.begin(), m.bytes.end());
  return out;
}

ProtocolTranscript ProtocolTranscript::from_bytes(std::span<const std::uint8_t> bytes) {
  ProtocolTranscript transcript;
  std::size_t offset = 0;
  std::uint8_t expected = 1;
  while (offset < bytes.size()) {
    const std::size_t start = offset;
    const Message message = Message::parse(bytes, offset);
    require(message.round == expected && message.sender == sender_of_round(expected),
            ErrorCategory::kParse, "transcript rounds out of order");
    transcript.messages.push_back(
        {message.sender, message.round, kind_of_round(message.round),
         std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(offset))});
    ++expected;
  }
  return transcript;
}

void ProtocolTranscript::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
  const auto bytes = to_bytes();
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCategory::kIo, "write failed: " + path.string());
}

ProtocolTranscript ProtocolTranscript::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot read " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return from_bytes(bytes);
}

void DuplexChannel::send(Party from, std::vector<std::uint8_t> bytes) {
  (from == Party::kClient ? to_server_ : to_client_).push_back(std::move(bytes));
}

std::vector<std::uint8_t> DuplexChannel::receive(Party to) {
  auto& queue = to == Party::kClient ? to_client_ : to_server_;
  require(!queue.empty(), ErrorCategory::kProtocolIntegrity, "no pending message");
  auto bytes = std::move(queue.front());
  queue.pop_front();
  return bytes;
}

std::vector<AdditiveCiphertext> client_round1_encrypt_query(const TernaryCode& query,
                                                            const AdditivePublicKey& pk_u,
                                                            CryptoRng& rng) {
  std::vector<AdditiveCiphertext> out;
  out.reserve(static_cast<std::size_t>(query.length()));
  for (const auto symbol : query.symbols())
    out.push_back(additive_encrypt_signed(pk_u, symbol, rng));
  return out;
}

std::vector<DoubleCiphertext> server_round2_encrypted_correlations(
    std::span<const AdditiveCiphertext> encrypted_query,
    const GroupRepresentations& representations, const AdditivePublicKey& pk_u,
    const MultiplicativePublicKey& pk_s, CryptoRng& rng) {
  require(static_cast<Index>(encrypted_query.size()) == representations.code_length(),
          ErrorCategory::kDimensionMismatch, "encrypted query has the wrong length");
  const LimbSchedule schedule = limb_schedule(pk_u, pk_s);
  std::vector<DoubleCiphertext> out;
  for (const auto& rep : representations.columns()) {
    const auto symbols = rep.symbols();
    AdditiveCiphertext acc{1};  // trivial encryption of 0; S >= 1 terms follow
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (symbols[i] == 0) continue;
      const AdditiveCiphertext term = symbols[i] > 0
                                          ? encrypted_query[i]
                                          : additive_scalar_mul(pk_u, encrypted_query[i], -1);
      acc = additive_add(pk_u, acc, term);
    }
    out.push_back(wrap(acc, schedule, pk_s, rng));
  }
  return out;
}

PermutedList client_round3_mask_permute(std::span<const DoubleCiphertext> correlations,
                                        const MultiplicativePublicKey& pk_s, CryptoRng& rng) {
  PermutedList out;
  out.permutation.resize(correlations.size());
  std::iota(out.permutation.begin(), out.permutation.end(), std::size_t{0});
  for (std::size_t i = out.permutation.size(); i > 1; --i)
    std::swap(out.permutation[i - 1], out.permutation[rng.below(std::uint64_t{i})]);

  for (const std::size_t source : out.permutation) {
    DoubleCiphertext fresh;
    for (const auto& limb : correlations[source].limbs)
      fresh.limbs.push_back(mult_rerandomize_by_one(pk_s, limb, rng));
    out.ciphertexts.push_back(std::move(fresh));
  }
  return out;
}

std::vector<MaskPair> draw_masks(std::size_t count, const SecurityParams& params,
                                 CryptoRng& rng) {
  require(params.mask_a_max >= 1 && params.mask_b_max >= 0, ErrorCategory::kMaskRange,
          "mask ranges must be positive");
  const auto a_span = static_cast<std::uint64_t>(params.mask_a_max);
  const auto b_span = static_cast<std::uint64_t>(params.mask_b_max);
  std::vector<MaskPair> masks(count);
  for (auto& m : masks) {
    // a uniform over [-A, -1] U [1, A]; b uniform over [-B, B].
    const auto u = static_cast<std::int64_t>(rng.below(2 * a_span));
    m.a = u < params.mask_a_max ? u - params.mask_a_max : u - params.mask_a_max + 1;
    m.b = static_cast<std::int64_t>(rng.below(2 * b_span + 1)) - params.mask_b_max;
  }
  return masks;
}

std::vector<AdditiveCiphertext> server_round4_blind_threshold(
    std::span<const DoubleCiphertext> permuted, const MultiplicativeSecretKey& sk_s,
    const AdditivePublicKey& pk_u, std::int64_t tau, int sparsity,
    std::span<const MaskPair> masks, const SecurityParams& params, CryptoRng& rng) {
  require(masks.size() == permuted.size(), ErrorCategory::kDimensionMismatch,
          "one mask pair per ciphertext");
  require(affine_bound(params, sparsity, tau) <= pk_u.n / 2, ErrorCategory::kMaskRange,
          "mask range overflows the additive plaintext window");
  for (const auto& m : masks) {
    require(m.a != 0 && m.a >= -params.mask_a_max && m.a <= params.mask_a_max &&
                m.b >= -params.mask_b_max && m.b <= params.mask_b_max,
            ErrorCategory::kMaskRange, "mask outside its configured range");
  }
  const LimbSchedule schedule = limb_schedule(pk_u, sk_s.pub);
  std::vector<AdditiveCiphertext> out;
  for (std::size_t k = 0; k < permuted.size(); ++k) {
    const AdditiveCiphertext correlation = unwrap(permuted[k], schedule, sk_s, pk_u);
    const mpz_class a = masks[k].a;
    const mpz_class offset = a * (2 * sparsity - mpz_class(tau)) + masks[k].b;
    const AdditiveCiphertext scaled = additive_scalar_mul(pk_u, correlation, -2 * a);
    out.push_back(additive_add(pk_u, scaled, additive_encrypt_signed(pk_u, offset, rng)));
  }
  return out;
}

std::vector<mpz_class> client_round5_decrypt_reveal(std::span<const AdditiveCiphertext> blinded,
                                                    const AdditiveSecretKey& sk_u) {
  std::vector<mpz_class> out;
  out.reserve(blinded.size());
  for (const auto& c : blinded) out.push_back(additive_decrypt_signed(sk_u, c));
  return out;
}

std::vector<mpz_class> unmask(std::span<const mpz_class> values,
                              std::span<const MaskPair> masks) {
  require(values.size() == masks.size(), ErrorCategory::kProtocolIntegrity,
          "revealed values and masks differ in count");
  std::vector<mpz_class> out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const mpz_class shifted = values[k] - masks[k].b;
    const mpz_class a = masks[k].a;
    require(mpz_divisible_p(shifted.get_mpz_t(), a.get_mpz_t()) != 0,
            ErrorCategory::kProtocolIntegrity, "revealed value does not unmask exactly");
    out.push_back(shifted / a);
  }
  return out;
}

ProtocolDecision server_decide(std::span<const mpz_class> values,
                               std::span<const MaskPair> masks, std::int64_t /*tau*/) {
  // The threshold is already folded into each value by round 4.
  for (const auto& v : unmask(values, masks))
    if (v <= 0) return {true};
  return {false};
}

Client::Client(TernaryCode query, AdditiveKeypair keys, MultiplicativePublicKey pk_s,
               std::uint64_t seed)
    : query_(std::move(query)), keys_(std::move(keys)), pk_s_(std::move(pk_s)), rng_(seed) {}

Message Client::round1() {
  return {1, Party::kClient, as_payloads(client_round1_encrypt_query(query_, keys_.pk, rng_))};
}

Message Client::round3(const Message& correlations) {
  expect(correlations, 2);
  const std::size_t limbs = limb_schedule(keys_.pk, pk_s_).limbs;
  const std::size_t groups = correlations.payloads.size() / (2 * limbs);
  const auto list = unflatten(correlations.payloads, groups, limbs);
  auto permuted = client_round3_mask_permute(list, pk_s_, rng_);
  permutation_ = std::move(permuted.permutation);
  return {3, Party::kClient, flatten(permuted.ciphertexts)};
}

Message Client::round5(const Message& blinded) {
  expect(blinded, 4);
  return {5, Party::kClient,
          client_round5_decrypt_reveal(as_additive(blinded.payloads), keys_.sk)};
}

Server::Server(GroupRepresentations representations, std::int64_t tau, SecurityParams params,
               MultiplicativeKeypair keys, AdditivePublicKey pk_u, std::uint64_t seed)
    : representations_(std::move(representations)),
      tau_(tau),
      params_(params),
      keys_(std::move(keys)),
      pk_u_(std::move(pk_u)),
      rng_(seed) {}

Message Server::round2(const Message& encrypted_query) {
  expect(encrypted_query, 1);
  const auto query = as_additive(encrypted_query.payloads);
  return {2, Party::kServer,
          flatten(server_round2_encrypted_correlations(query, representations_, pk_u_,
                                                       keys_.pk, rng_))};
}

Message Server::round4(const Message& permuted) {
  expect(permuted, 3);
  const std::size_t limbs = limb_schedule(pk_u_, keys_.pk).limbs;
  const auto groups = static_cast<std::size_t>(representations_.count());
  const auto list = unflatten(permuted.payloads, groups, limbs);
  masks_ = draw_masks(groups, params_, rng_);
  return {4, Party::kServer,
          as_payloads(server_round4_blind_threshold(list, keys_.sk, pk_u_, tau_,
                                                    representations_.sparsity(), masks_,
                                                    params_, rng_))};
}

ProtocolDecision Server::decide(const Message& revealed) {
  expect(revealed, 5);
  unmasked_ = unmask(revealed.payloads, masks_);
  return server_decide(revealed.payloads, masks_, tau_);
}

ProtocolKeys generate_keys(const SecurityParams& params, std::uint64_t seed) {
  CryptoRng client_rng(derive_seed(seed, 1));
  CryptoRng server_rng(derive_seed(seed, 2));
  return {additive_keygen(params.additive_bits, client_rng),
          mult_keygen(params.effective_multiplicative_bits(), server_rng)};
}

ProtocolRun run_protocol(const TernaryCode& query, const GroupRepresentations& representations,
                         std::int64_t tau, const ProtocolKeys& keys,
                         const SecurityParams& params, std::uint64_t seed) {
  require(query.length() == representations.code_length(), ErrorCategory::kDimensionMismatch,
          "query and representations differ in length");
  require(query.sparsity() == representations.sparsity(), ErrorCategory::kInvalidSparsity,
          "query and representations must share the same exact sparsity");

  Client client(query, keys.client, keys.server.pk, derive_seed(seed, 3));
  Server server(representations, tau, params, keys.server, keys.client.pk,
                derive_seed(seed, 4));
  DuplexChannel channel;
  ProtocolRun run;

  auto post = [&](const Message& message) {
    auto bytes = message.serialize();
    run.transcript.messages.push_back(
        {message.sender, message.round, kind_of_round(message.round), bytes});
    channel.send(message.sender, std::move(bytes));
  };
  auto take = [&](Party to) {
    const auto bytes = channel.receive(to);
    std::size_t offset = 0;
    Message message = Message::parse(bytes, offset);
    require(offset == bytes.size(), ErrorCategory::kProtocolIntegrity,
            "trailing bytes after message");
    return message;
  };

  post(client.round1());
  post(server.round2(take(Party::kServer)));
  post(client.round3(take(Party::kClient)));
  post(server.round4(take(Party::kServer)));
  post(client.round5(take(Party::kClient)));
  const Message revealed = take(Party::kServer);
  run.decision = server.decide(revealed);

  run.revealed = revealed.payloads;
  run.masks = server.masks();
  run.permutation = client.permutation();
  run.unmasked = server.unmasked();
  return run;
}

ProtocolRun run_protocol(const TernaryCode& query, const GroupRepresentations& representations,
                         std::int64_t tau, const SecurityParams& params, std::uint64_t seed) {
  return run_protocol(query, representations, tau, generate_keys(params, seed), params, seed);
}

bool plaintext_decision(const TernaryCode& query, const GroupRepresentations& representations,
                        std::int64_t tau) {
  for (const auto& rep : representations.columns())
    if (squared_distance(query, rep) <= tau) return true;
  return false;
}

}  // namespace gmk::protocol
