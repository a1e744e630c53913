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

#include "gmk/eval.hpp"

#include <algorithm>
#include <string>

#include "gmk/error.hpp"
#include "gmk/kernels.hpp"
#include "gmk/random.hpp"

namespace gmk {

namespace {

std::vector<TernaryCode> embed_all(const Model& model, const Matrix& signatures) {
  require(signatures.rows() == model.projection.dim(), ErrorCategory::kDimensionMismatch,
          "query dimension does not match the model");
  return kernels::parallel::ternarize_columns(
      model.projection.matrix().transpose() * signatures, model.config.sparsity);
}

Matrix stack(const std::vector<Vector>& vectors, Index dim) {
  Matrix out(dim, static_cast<Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) out.col(static_cast<Index>(i)) = vectors[i];
  return out;
}

Matrix genuine_matrix(const QuerySet& queries, Index dim) {
  Matrix out(dim, static_cast<Index>(queries.genuine.size()));
  for (std::size_t i = 0; i < queries.genuine.size(); ++i)
    out.col(static_cast<Index>(i)) = queries.genuine[i].signature;
  return out;
}

void check_queries(const QuerySet& queries, const Model& model) {
  require(!queries.genuine.empty() && !queries.impostors.empty(),
          ErrorCategory::kEmptyQuerySet, "need genuine and impostor queries");
  for (const auto& q : queries.genuine)
    require(q.group >= 0 && q.group < model.assignment.groups(), ErrorCategory::kGroupRange,
            "genuine query claims group " + std::to_string(q.group));
}

struct Nearest {
  int distance;
  int group;
};

std::vector<Nearest> nearest_groups(const kernels::DistanceMatrix& distances) {
  std::vector<Nearest> out(static_cast<std::size_t>(distances.rows()));
  for (Index i = 0; i < distances.rows(); ++i) {
    Index best = 0;
    const int value = distances.row(i).minCoeff(&best);
    out[static_cast<std::size_t>(i)] = {value, static_cast<int>(best)};
  }
  return out;
}

}  // namespace

QuerySet make_query_set(const Dataset& dataset, const Model& model) {
  require(dataset.enrolled.count() == model.assignment.count(),
          ErrorCategory::kDimensionMismatch, "dataset was not the one the model enrolled");
  QuerySet out;
  for (Index i = 0; i < dataset.genuine.count(); ++i) {
    out.genuine.push_back(
        {dataset.genuine.column(i),
         model.assignment.group_of(dataset.genuine_identity[static_cast<std::size_t>(i)])});
  }
  for (Index i = 0; i < dataset.impostors.count(); ++i)
    out.impostors.emplace_back(dataset.impostors.column(i));
  return out;
}

bool verify(const Model& model, const TernaryCode& query, int group, double threshold) {
  require(group >= 0 && group < model.representations.count(), ErrorCategory::kGroupRange,
          "group " + std::to_string(group) + " out of range");
  return squared_distance(query, model.representations.column(group)) <= threshold;
}

Scores verification_scores(const Model& model, const QuerySet& queries,
                           std::uint64_t claim_seed) {
  check_queries(queries, model);
  const Index dim = model.projection.dim();
  const auto& reps = model.representations.columns();
  const auto genuine_codes = embed_all(model, genuine_matrix(queries, dim));
  const auto impostor_codes = embed_all(model, stack(queries.impostors, dim));

  Rng rng(claim_seed);
  std::vector<int> claims(impostor_codes.size());
  for (auto& c : claims)
    c = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(reps.size())));

  Scores scores{std::vector<int>(genuine_codes.size()), std::vector<int>(impostor_codes.size())};
  const auto n_genuine = static_cast<Index>(genuine_codes.size());
  const auto n_impostor = static_cast<Index>(impostor_codes.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n_genuine; ++i) {
    const auto k = static_cast<std::size_t>(i);
    scores.genuine[k] = squared_distance(
        genuine_codes[k], reps[static_cast<std::size_t>(queries.genuine[k].group)]);
  }
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n_impostor; ++i) {
    const auto k = static_cast<std::size_t>(i);
    scores.impostor[k] =
        squared_distance(impostor_codes[k], reps[static_cast<std::size_t>(claims[k])]);
  }
  return scores;
}

RocCurve roc_from_scores(const Scores& scores, int sparsity) {
  require(!scores.genuine.empty() && !scores.impostor.empty(),
          ErrorCategory::kEmptyQuerySet, "need genuine and impostor scores");
  std::vector<int> genuine = scores.genuine;
  std::vector<int> impostor = scores.impostor;
  std::sort(genuine.begin(), genuine.end());
  std::sort(impostor.begin(), impostor.end());

  std::vector<int> thresholds = {-1, 4 * sparsity};
  thresholds.insert(thresholds.end(), genuine.begin(), genuine.end());
  thresholds.insert(thresholds.end(), impostor.begin(), impostor.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  RocCurve roc;
  for (const int t : thresholds) {
    const auto accepted_impostors =
        std::upper_bound(impostor.begin(), impostor.end(), t) - impostor.begin();
    const auto accepted_genuine =
        std::upper_bound(genuine.begin(), genuine.end(), t) - genuine.begin();
    roc.points.push_back(
        {static_cast<double>(t),
         static_cast<double>(accepted_impostors) / static_cast<double>(impostor.size()),
         static_cast<double>(static_cast<Index>(genuine.size()) - accepted_genuine) /
             static_cast<double>(genuine.size())});
  }
  return roc;
}

RocCurve verification_sweep(const Model& model, const QuerySet& queries,
                            std::uint64_t claim_seed) {
  return roc_from_scores(verification_scores(model, queries, claim_seed),
                         model.config.sparsity);
}

RocPoint operating_point(const RocCurve& roc, double target) {
  require(target > 0.0 && target < 1.0, ErrorCategory::kInvalidInput,
          "target P_fp must lie in (0, 1)");
  require(!roc.points.empty(), ErrorCategory::kInvalidInput, "empty ROC curve");
  const RocPoint* chosen = &roc.points.front();
  for (const auto& p : roc.points)
    if (p.pfp <= target) chosen = &p;
  return *chosen;
}

double pfn_at_pfp(const RocCurve& roc, double target) {
  return operating_point(roc, target).pfn;
}

std::optional<int> identify(const Model& model, const TernaryCode& query,
                            double threshold) {
  int best = -1;
  int best_distance = 0;
  for (Index g = 0; g < model.representations.count(); ++g) {
    const int d = squared_distance(query, model.representations.column(g));
    if (best < 0 || d < best_distance) {
      best = static_cast<int>(g);
      best_distance = d;
    }
  }
  if (best < 0 || best_distance > threshold) return std::nullopt;
  return best;
}

namespace {

struct IdentificationScores {
  std::vector<Nearest> genuine;
  std::vector<Nearest> impostor;
};

IdentificationScores identification_scores(const Model& model, const QuerySet& queries) {
  check_queries(queries, model);
  const Index dim = model.projection.dim();
  const auto& reps = model.representations.columns();
  const auto genuine_codes = embed_all(model, genuine_matrix(queries, dim));
  const auto impostor_codes = embed_all(model, stack(queries.impostors, dim));
  return {nearest_groups(kernels::parallel::code_distances(genuine_codes, reps)),
          nearest_groups(kernels::parallel::code_distances(impostor_codes, reps))};
}

IdentificationReport report_at(const IdentificationScores& scores,
                               const QuerySet& queries, double threshold) {
  Index accepted = 0;
  Index misidentified = 0;
  for (std::size_t i = 0; i < scores.genuine.size(); ++i) {
    if (scores.genuine[i].distance > threshold) continue;
    ++accepted;
    misidentified += scores.genuine[i].group != queries.genuine[i].group;
  }
  Index false_accepts = 0;
  for (const auto& s : scores.impostor) false_accepts += s.distance <= threshold;

  IdentificationReport report;
  report.threshold = threshold;
  report.pfn = 1.0 - static_cast<double>(accepted) / static_cast<double>(scores.genuine.size());
  report.pfp = static_cast<double>(false_accepts) / static_cast<double>(scores.impostor.size());
  report.no_accepted_genuine = accepted == 0;
  report.p_epsilon = accepted == 0 ? 0.0
                                   : static_cast<double>(misidentified) /
                                         static_cast<double>(accepted);
  report.dir = (1.0 - report.p_epsilon) * (1.0 - report.pfn);
  return report;
}

}  // namespace

IdentificationReport identification_report(const Model& model,
                                           const QuerySet& queries, double threshold) {
  return report_at(identification_scores(model, queries), queries, threshold);
}

IdentificationReport identification_report_at_pfp(const Model& model,
                                                  const QuerySet& queries, double target) {
  const auto scores = identification_scores(model, queries);
  Scores minimum;
  for (const auto& s : scores.genuine) minimum.genuine.push_back(s.distance);
  for (const auto& s : scores.impostor) minimum.impostor.push_back(s.distance);
  const RocPoint point =
      operating_point(roc_from_scores(minimum, model.config.sparsity), target);
  return report_at(scores, queries, point.threshold);
}

Vector reconstruct(const ProjectionMatrix& projection, const TernaryCode& code,
                   double beta) {
  require(code.length() == projection.code_length(), ErrorCategory::kDimensionMismatch,
          "code length does not match W");
  return beta * (projection.matrix() * code.to_vector());
}

double fit_beta(const ProjectionMatrix& projection, std::span<const TernaryCode> codes,
                const Matrix& targets) {
  require(!codes.empty() && static_cast<Index>(codes.size()) == targets.cols(),
          ErrorCategory::kDimensionMismatch, "codes and targets must pair up");
  require(targets.rows() == projection.dim(), ErrorCategory::kDimensionMismatch,
          "target dimension does not match W");
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    require(codes[i].length() == projection.code_length(),
            ErrorCategory::kDimensionMismatch, "code length does not match W");
    const Vector lifted = projection.matrix() * codes[i].to_vector();
    numerator += targets.col(static_cast<Index>(i)).dot(lifted);
    denominator += lifted.squaredNorm();
  }
  return denominator > 0.0 ? numerator / denominator : 0.0;
}

SecurityReport security_report(const SignatureMatrix& signatures,
                               const QuerySet& queries, const Model& model) {
  require(signatures.count() == model.codes.count() &&
              signatures.dim() == model.projection.dim(),
          ErrorCategory::kDimensionMismatch, "model was not trained on these signatures");
  require(!queries.genuine.empty(), ErrorCategory::kEmptyQuerySet,
          "need genuine queries for the privacy attack");

  SecurityReport report;
  report.beta = fit_beta(model.projection, model.codes.columns(), signatures.matrix());
  const auto d = static_cast<double>(signatures.dim());

  std::vector<Vector> group_estimates;
  for (Index g = 0; g < model.representations.count(); ++g)
    group_estimates.push_back(
        reconstruct(model.projection, model.representations.column(g), report.beta));
  double security = 0.0;
  for (Index i = 0; i < signatures.count(); ++i)
    security += (signatures.column(i) -
                 group_estimates[static_cast<std::size_t>(model.assignment.group_of(i))])
                    .squaredNorm();
  report.mse_security = security / (d * static_cast<double>(signatures.count()));

  const Matrix genuine = genuine_matrix(queries, signatures.dim());
  const auto codes = embed_all(model, genuine);
  double privacy = 0.0;
  for (std::size_t i = 0; i < codes.size(); ++i)
    privacy += (genuine.col(static_cast<Index>(i)) -
                reconstruct(model.projection, codes[i], report.beta))
                   .squaredNorm();
  report.mse_privacy = privacy / (d * static_cast<double>(codes.size()));
  return report;
}

}  // namespace gmk
