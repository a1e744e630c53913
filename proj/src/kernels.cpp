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

#include "gmk/kernels.hpp"

#include <limits>
#include <optional>
#include <string>

#include "gmk/error.hpp"

namespace gmk::kernels {

namespace {

void check_ternarize_input(const Matrix& values, int sparsity) {
  require(sparsity >= 1 && sparsity < values.rows(),
          ErrorCategory::kInvalidSparsity,
          "sparsity " + std::to_string(sparsity) + " must lie in [1, " +
              std::to_string(values.rows()) + ")");
  require(values.allFinite(), ErrorCategory::kInvalidInput,
          "ternarize input has non-finite entries");
}

void check_centroid_input(const Matrix& points, const Matrix& centroids) {
  require(points.rows() == centroids.rows(), ErrorCategory::kDimensionMismatch,
          "points and centroids differ in dimension");
  require(centroids.cols() >= 1, ErrorCategory::kDimensionMismatch,
          "need at least one centroid");
}

void check_code_lengths(std::span<const TernaryCode> queries,
                        std::span<const TernaryCode> references) {
  if (queries.empty() || references.empty()) return;
  const Index length = references.front().length();
  for (const auto& c : queries)
    require(c.length() == length, ErrorCategory::kDimensionMismatch,
            "code length mismatch");
  for (const auto& c : references)
    require(c.length() == length, ErrorCategory::kDimensionMismatch,
            "code length mismatch");
}

void nearest_one(const Matrix& points, const Matrix& centroids, Index i,
                 NearestResult& out) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Index g = 0; g < centroids.cols(); ++g) {
    double dist = 0.0;
    for (Index k = 0; k < points.rows(); ++k) {
      const double diff = points(k, i) - centroids(k, g);
      dist += diff * diff;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<int>(g);
    }
  }
  out.index[static_cast<std::size_t>(i)] = best;
  out.distance[static_cast<std::size_t>(i)] = best_dist;
}

}  // namespace

namespace serial {

std::vector<TernaryCode> ternarize_columns(const Matrix& values, int sparsity) {
  check_ternarize_input(values, sparsity);
  std::vector<TernaryCode> codes;
  codes.reserve(static_cast<std::size_t>(values.cols()));
  for (Index j = 0; j < values.cols(); ++j)
    codes.push_back(ternarize(values.col(j), sparsity));
  return codes;
}

NearestResult nearest_centroid(const Matrix& points, const Matrix& centroids) {
  check_centroid_input(points, centroids);
  NearestResult out{std::vector<int>(static_cast<std::size_t>(points.cols())),
                    std::vector<double>(static_cast<std::size_t>(points.cols()))};
  for (Index i = 0; i < points.cols(); ++i) nearest_one(points, centroids, i, out);
  return out;
}

DistanceMatrix code_distances(std::span<const TernaryCode> queries,
                              std::span<const TernaryCode> references) {
  check_code_lengths(queries, references);
  DistanceMatrix out(static_cast<Index>(queries.size()),
                     static_cast<Index>(references.size()));
  for (std::size_t i = 0; i < queries.size(); ++i)
    for (std::size_t j = 0; j < references.size(); ++j)
      out(static_cast<Index>(i), static_cast<Index>(j)) =
          squared_distance(queries[i], references[j]);
  return out;
}

}  // namespace serial

namespace parallel {

std::vector<TernaryCode> ternarize_columns(const Matrix& values, int sparsity) {
  check_ternarize_input(values, sparsity);
  const Index n = values.cols();
  std::vector<std::optional<TernaryCode>> slots(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n; ++j)
    slots[static_cast<std::size_t>(j)].emplace(ternarize(values.col(j), sparsity));

  std::vector<TernaryCode> codes;
  codes.reserve(slots.size());
  for (auto& slot : slots) codes.push_back(std::move(*slot));
  return codes;
}

NearestResult nearest_centroid(const Matrix& points, const Matrix& centroids) {
  check_centroid_input(points, centroids);
  NearestResult out{std::vector<int>(static_cast<std::size_t>(points.cols())),
                    std::vector<double>(static_cast<std::size_t>(points.cols()))};
  const Index n = points.cols();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) nearest_one(points, centroids, i, out);
  return out;
}

DistanceMatrix code_distances(std::span<const TernaryCode> queries,
                              std::span<const TernaryCode> references) {
  check_code_lengths(queries, references);
  const auto rows = static_cast<Index>(queries.size());
  const auto cols = static_cast<Index>(references.size());
  DistanceMatrix out(rows, cols);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      out(i, j) = squared_distance(queries[static_cast<std::size_t>(i)],
                                   references[static_cast<std::size_t>(j)]);
  return out;
}

}  // namespace parallel

}  // namespace gmk::kernels
