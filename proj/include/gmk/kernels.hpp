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

#include <span>
#include <vector>

#include "gmk/core.hpp"

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version; both produce bit-identical results because each output
// element is computed independently with the same operation order.
namespace gmk::kernels {

using DistanceMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

struct NearestResult {
  std::vector<int> index;        // nearest centroid per point, lowest index on ties
  std::vector<double> distance;  // squared Euclidean distance to it
};

namespace serial {

std::vector<TernaryCode> ternarize_columns(const Matrix& values, int sparsity);
NearestResult nearest_centroid(const Matrix& points, const Matrix& centroids);
// (i, j) = squared_distance(queries[i], references[j]).
DistanceMatrix code_distances(std::span<const TernaryCode> queries,
                              std::span<const TernaryCode> references);

}  // namespace serial

namespace parallel {

std::vector<TernaryCode> ternarize_columns(const Matrix& values, int sparsity);
NearestResult nearest_centroid(const Matrix& points, const Matrix& centroids);
DistanceMatrix code_distances(std::span<const TernaryCode> queries,
                              std::span<const TernaryCode> references);

}  // namespace parallel

}  // namespace gmk::kernels
