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

#include "gmk/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gmk/error.hpp"
#include "gmk/random.hpp"

namespace gmk {

SignatureMatrix::SignatureMatrix(Matrix data) : data_(std::move(data)) {
  require(data_.rows() >= 1 && data_.cols() >= 1,
          ErrorCategory::kDimensionMismatch, "signature matrix must be non-empty");
  require(data_.allFinite(), ErrorCategory::kInvalidInput,
          "signature matrix has non-finite entries");
  for (Index j = 0; j < data_.cols(); ++j) {
    const double norm = data_.col(j).norm();
    require(std::abs(norm - 1.0) <= kUnitNormTolerance,
            ErrorCategory::kInvalidInput,
            "signature " + std::to_string(j) + " is not unit norm (" +
                std::to_string(norm) + ")");
  }
}

SignatureMatrix SignatureMatrix::normalized(Matrix data) {
  for (Index j = 0; j < data.cols(); ++j) {
    const double norm = data.col(j).norm();
    require(norm > 0.0 && std::isfinite(norm), ErrorCategory::kInvalidInput,
            "cannot normalize signature " + std::to_string(j));
    data.col(j) /= norm;
  }
  return SignatureMatrix(std::move(data));
}

ProjectionMatrix::ProjectionMatrix(Matrix data) : data_(std::move(data)) {
  require(data_.cols() >= 1 && data_.cols() < data_.rows(),
          ErrorCategory::kDimensionMismatch,
          "projection must be d x l with 1 <= l < d");
  const Matrix gram = data_.transpose() * data_;
  const double err =
      (gram - Matrix::Identity(data_.cols(), data_.cols())).cwiseAbs().maxCoeff();
  require(err <= kOrthonormalTolerance, ErrorCategory::kInvalidInput,
          "projection columns are not orthonormal (max |W^T W - I| = " +
              std::to_string(err) + ")");
}

TernaryCode::TernaryCode(std::vector<std::int8_t> symbols, int sparsity)
    : symbols_(std::move(symbols)), sparsity_(sparsity) {
  const auto length = static_cast<int>(symbols_.size());
  require(sparsity_ >= 1 && sparsity_ < length, ErrorCategory::kInvalidSparsity,
          "sparsity " + std::to_string(sparsity_) + " must lie in [1, " +
              std::to_string(length) + ")");
  int nonzeros = 0;
  for (const auto s : symbols_) {
    require(s >= -1 && s <= 1, ErrorCategory::kInvalidInput,
            "ternary symbol out of alphabet");
    nonzeros += s != 0;
  }
  require(nonzeros == sparsity_, ErrorCategory::kInvalidSparsity,
          "code has " + std::to_string(nonzeros) + " nonzeros, expected " +
              std::to_string(sparsity_));
}

Vector TernaryCode::to_vector() const {
  Vector v(length());
  for (Index i = 0; i < length(); ++i) v(i) = symbols_[static_cast<std::size_t>(i)];
  return v;
}

TernaryCode TernaryCode::negated() const {
  std::vector<std::int8_t> flipped(symbols_.size());
  std::transform(symbols_.begin(), symbols_.end(), flipped.begin(),
                 [](std::int8_t s) { return static_cast<std::int8_t>(-s); });
  return TernaryCode(std::move(flipped), sparsity_);
}

void ModelConfig::validate(Index dim, Index count) const {
  require(gamma > 0.0 && lambda > gamma, ErrorCategory::kConfig,
          "need lambda > gamma > 0");
  require(sparsity >= 1 && sparsity < code_length, ErrorCategory::kConfig,
          "need 1 <= S < l");
  require(groups >= 1, ErrorCategory::kConfig, "need M >= 1");
  require(max_outer_iters >= 1, ErrorCategory::kConfig,
          "max_outer_iters must be positive");
  require(convergence_tol >= 0.0, ErrorCategory::kConfig,
          "convergence_tol must be nonnegative");
  if (dim > 0) {
    require(code_length < dim, ErrorCategory::kConfig, "need l < d");
  }
  if (count > 0) {
    require(groups <= count, ErrorCategory::kConfig, "need M <= N");
  }
}

TernaryCode ternarize(std::span<const double> values, int sparsity) {
  const auto length = static_cast<int>(values.size());
  require(sparsity >= 1 && sparsity < length, ErrorCategory::kInvalidSparsity,
          "sparsity " + std::to_string(sparsity) + " must lie in [1, " +
              std::to_string(length) + ")");
  for (const double v : values) {
    require(std::isfinite(v), ErrorCategory::kInvalidInput,
            "ternarize input has non-finite entries");
  }

  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + sparsity, order.end(),
                    [&](int a, int b) {
                      const double ma = std::abs(values[a]);
                      const double mb = std::abs(values[b]);
                      return ma > mb || (ma == mb && a < b);
                    });

  std::vector<std::int8_t> symbols(values.size(), 0);
  for (int k = 0; k < sparsity; ++k) {
    const int i = order[static_cast<std::size_t>(k)];
    symbols[static_cast<std::size_t>(i)] = values[i] < 0.0 ? -1 : 1;
  }
  return TernaryCode(std::move(symbols), sparsity);
}

TernaryCode ternarize(const Eigen::Ref<const Vector>& values, int sparsity) {
  if (values.innerStride() == 1) {
    return ternarize(std::span<const double>(values.data(),
                                             static_cast<std::size_t>(values.size())),
                     sparsity);
  }
  const Vector copy = values;
  return ternarize(std::span<const double>(copy.data(),
                                           static_cast<std::size_t>(copy.size())),
                   sparsity);
}

TernaryCode embed(const ProjectionMatrix& projection,
                  const Eigen::Ref<const Vector>& signature, int sparsity) {
  require(signature.size() == projection.dim(),
          ErrorCategory::kDimensionMismatch,
          "signature length " + std::to_string(signature.size()) +
              " != projection rows " + std::to_string(projection.dim()));
  const Vector projected = projection.matrix().transpose() * signature;
  return ternarize(projected, sparsity);
}

int correlation(const TernaryCode& lhs, const TernaryCode& rhs) {
  require(lhs.length() == rhs.length(), ErrorCategory::kDimensionMismatch,
          "code length mismatch");
  const auto a = lhs.symbols();
  const auto b = rhs.symbols();
  int sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

int squared_distance(const TernaryCode& lhs, const TernaryCode& rhs) {
  require(lhs.length() == rhs.length(), ErrorCategory::kDimensionMismatch,
          "code length mismatch");
  const auto a = lhs.symbols();
  const auto b = rhs.symbols();
  int sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

Matrix random_orthonormal(Index rows, Index cols, Rng& rng) {
  const Matrix g = gaussian_matrix(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace gmk
