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
#include <optional>
#include <vector>

#include "gmk/core.hpp"
#include "gmk/data.hpp"
#include "gmk/learning.hpp"

namespace gmk {

inline constexpr double kTargetFalsePositiveRate = 0.05;

struct GenuineQuery {
  Vector signature;
  int group = 0;
};

struct QuerySet {
  std::vector<GenuineQuery> genuine;
  std::vector<Vector> impostors;
};

// Genuine queries claim the group their enrolled identity was assigned to.
QuerySet make_query_set(const Dataset& dataset, const Model& model);

struct RocPoint {
  double threshold = 0.0;
  double pfp = 0.0;
  double pfn = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // ascending threshold
};

// Integer distances of the two hypotheses, before thresholding.
struct Scores {
  std::vector<int> genuine;
  std::vector<int> impostor;
};

struct IdentificationReport {
  double pfn = 0.0;
  double p_epsilon = 0.0;
  double dir = 0.0;
  double threshold = 0.0;
  double pfp = 0.0;
  // Set when no genuine query passed detection; p_epsilon is then 0.
  bool no_accepted_genuine = false;
};

struct SecurityReport {
  double mse_security = 0.0;
  double mse_privacy = 0.0;
  double beta = 0.0;
};

// Accept iff ||p - r_g||^2 <= threshold.
bool verify(const Model& model, const TernaryCode& query, int group, double threshold);

// Genuine distances to the true group; each impostor claims one group drawn
// uniformly with `claim_seed`.
Scores verification_scores(const Model& model, const QuerySet& queries,
                           std::uint64_t claim_seed);

// Thresholds: -1, every distinct score, and 4S. P_fp counts impostors with
// score <= threshold, P_fn genuine queries with score > threshold.
RocCurve roc_from_scores(const Scores& scores, int sparsity);

RocCurve verification_sweep(const Model& model, const QuerySet& queries,
                            std::uint64_t claim_seed);

// P_fn at the largest threshold whose P_fp does not exceed `target`.
double pfn_at_pfp(const RocCurve& roc, double target);
// The operating point selected by pfn_at_pfp.
RocPoint operating_point(const RocCurve& roc, double target);

// Nearest group if its distance is within threshold, lowest index on ties.
std::optional<int> identify(const Model& model, const TernaryCode& query,
                            double threshold);

IdentificationReport identification_report(const Model& model,
                                           const QuerySet& queries, double threshold);
// Picks the threshold from the minimum-distance ROC at `target` P_fp.
IdentificationReport identification_report_at_pfp(const Model& model,
                                                  const QuerySet& queries,
                                                  double target = kTargetFalsePositiveRate);

// beta * W * code.
Vector reconstruct(const ProjectionMatrix& projection, const TernaryCode& code,
                   double beta);

// Scalar least-squares gain argmin_beta sum ||x_i - beta W v_i||^2; 0 when all
// W v_i vanish. `targets` holds x_i as columns.
double fit_beta(const ProjectionMatrix& projection, std::span<const TernaryCode> codes,
                const Matrix& targets);

// The attacker knows W and fits beta on the enrolled (x_i, e_i) pairs.
// MSE_S reconstructs each enrolled x_i from its group's representation;
// MSE_P reconstructs each genuine query from its own embedding.
SecurityReport security_report(const SignatureMatrix& signatures,
                               const QuerySet& queries, const Model& model);

}  // namespace gmk
