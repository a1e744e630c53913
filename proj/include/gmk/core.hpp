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
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gmk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kUnitNormTolerance = 1e-6;
inline constexpr double kOrthonormalTolerance = 1e-8;

// Enrolled signatures stored one per column (d x N). Columns have unit norm.
class SignatureMatrix {
 public:
  explicit SignatureMatrix(Matrix data);

  // Normalizes every column before validation. Zero columns are rejected.
  static SignatureMatrix normalized(Matrix data);

  const Matrix& matrix() const noexcept { return data_; }
  Index dim() const noexcept { return data_.rows(); }
  Index count() const noexcept { return data_.cols(); }
  auto column(Index i) const { return data_.col(i); }

 private:
  Matrix data_;
};

// d x l matrix with orthonormal columns, l < d.
class ProjectionMatrix {
 public:
  explicit ProjectionMatrix(Matrix data);

  const Matrix& matrix() const noexcept { return data_; }
  Index dim() const noexcept { return data_.rows(); }
  Index code_length() const noexcept { return data_.cols(); }

 private:
  Matrix data_;
};

// Vector over {-1, 0, +1} with exactly `sparsity` nonzero symbols.
class TernaryCode {
 public:
  TernaryCode(std::vector<std::int8_t> symbols, int sparsity);

  Index length() const noexcept { return static_cast<Index>(symbols_.size()); }
  int sparsity() const noexcept { return sparsity_; }
  std::span<const std::int8_t> symbols() const noexcept { return symbols_; }
  std::int8_t operator[](Index i) const { return symbols_[static_cast<std::size_t>(i)]; }

  Vector to_vector() const;
  TernaryCode negated() const;

  friend bool operator==(const TernaryCode&, const TernaryCode&) = default;

 private:
  std::vector<std::int8_t> symbols_;
  int sparsity_;
};

struct ModelConfig {
  int code_length = 32;    // l
  int sparsity = 8;        // S
  int groups = 16;         // M
  // Unit-norm signatures give W^T x entries well below 1, so lambda near 1
  // lets lambda * r_g override the data term and every code collapses onto
  // its group representation.
  double lambda = 0.5;
  double gamma = 0.05;
  int max_outer_iters = 30;
  double convergence_tol = 1e-6;
  std::uint64_t seed = 1;

  // Checks the parameter invariants, plus the data-dependent ones when
  // `dim` / `count` are positive.
  void validate(Index dim = 0, Index count = 0) const;
};

// Keeps the S largest-magnitude components as their sign (sign(0) = +1),
// breaking magnitude ties by lowest index.
TernaryCode ternarize(std::span<const double> values, int sparsity);
TernaryCode ternarize(const Eigen::Ref<const Vector>& values, int sparsity);

// T_S(W^T x).
TernaryCode embed(const ProjectionMatrix& projection,
                  const Eigen::Ref<const Vector>& signature, int sparsity);

int correlation(const TernaryCode& lhs, const TernaryCode& rhs);

// Exact integer ||lhs - rhs||^2; equals 2S - 2<lhs, rhs> for exactly-S codes.
int squared_distance(const TernaryCode& lhs, const TernaryCode& rhs);

}  // namespace gmk
