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

#include <limits>

#include "doctest.h"
#include "gmk/core.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace gmk;
using gmk::testing::category_of;
using gmk::testing::code;

TEST_CASE("ternarize keeps the largest magnitudes as signs") {
  const Vector v = (Vector(4) << 0.5, -2.0, 0.1, 3.0).finished();
  CHECK(ternarize(v, 2) == code({0, -1, 0, 1}, 2));
}

TEST_CASE("ternarize breaks ties by lowest index and maps zero to plus") {
  CHECK(ternarize(Vector::Zero(4), 1) == code({1, 0, 0, 0}, 1));
  const Vector tied = (Vector(5) << 1.0, -1.0, 1.0, -1.0, 0.5).finished();
  CHECK(ternarize(tied, 3) == code({1, -1, 1, 0, 0}, 3));
}

TEST_CASE("ternarize matches a full-sort reference") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(64);
    for (auto& x : v) x = standard_normal(rng);
    // Force some exact magnitude ties.
    if (trial % 3 == 0) v[5] = -v[40];
    CHECK(oracle::symbols(ternarize(std::span<const double>(v), 16)) == oracle::ternarize(v, 16));
  }
}

TEST_CASE("ternarize rejects bad sparsity and non-finite input") {
  const Vector v = Vector::Ones(4);
  CHECK(category_of([&] { ternarize(v, 4); }) == ErrorCategory::kInvalidSparsity);
  CHECK(category_of([&] { ternarize(v, 0); }) == ErrorCategory::kInvalidSparsity);
  Vector bad = v;
  bad(2) = std::numeric_limits<double>::quiet_NaN();
  CHECK(category_of([&] { ternarize(bad, 2); }) == ErrorCategory::kInvalidInput);
  bad(2) = std::numeric_limits<double>::infinity();
  CHECK(category_of([&] { ternarize(bad, 2); }) == ErrorCategory::kInvalidInput);
}

TEST_CASE("ternarize is invariant to positive scaling and idempotent") {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    Vector v(24);
    for (Index i = 0; i < v.size(); ++i) v(i) = standard_normal(rng);
    const TernaryCode t = ternarize(v, 6);
    const double c = 0.001 + 100.0 * uniform_unit(rng);
    CHECK(ternarize(Vector(c * v), 6) == t);
    CHECK(ternarize(Vector(c * t.to_vector()), 6) == t);
  }
}

TEST_CASE("TernaryCode enforces exactly S nonzeros over {-1,0,1}") {
  CHECK(category_of([] { code({1, 0, 0}, 2); }) == ErrorCategory::kInvalidSparsity);
  CHECK(category_of([] { code({1, 1, 1}, 3); }) == ErrorCategory::kInvalidSparsity);
  CHECK(category_of([] { code({2, 0, 0}, 1); }) == ErrorCategory::kInvalidInput);
  CHECK(code({0, -1, 1}, 2).negated() == code({0, 1, -1}, 2));
}

TEST_CASE("embed projects then ternarizes") {
  Matrix w = Matrix::Zero(4, 2);
  w(0, 0) = 1.0;
  w(1, 1) = 1.0;
  const Vector x = (Vector(4) << 3.0, -1.0, 9.0, 9.0).finished();
  CHECK(embed(ProjectionMatrix(w), x, 1) == code({1, 0}, 1));

  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const ProjectionMatrix p(random_orthonormal(20, 10, rng));
    Vector q(20);
    for (Index i = 0; i < 20; ++i) q(i) = standard_normal(rng);
    const Vector proj = p.matrix().transpose() * q;
    CHECK(embed(p, q, 4) == ternarize(proj, 4));
    CHECK(embed(p, q, 4).sparsity() == 4);
  }
  CHECK(category_of([&] { embed(ProjectionMatrix(w), Vector::Ones(3), 1); }) ==
        ErrorCategory::kDimensionMismatch);
}

TEST_CASE("correlation and squared distance agree with loops and the 2S identity") {
  const TernaryCode r = code({1, 0, -1, 0, 1, 0}, 3);
  CHECK(correlation(r, r) == 3);
  CHECK(squared_distance(r, r) == 0);
  CHECK(squared_distance(r, r.negated()) == 12);
  CHECK(correlation(r, code({0, 1, 0, 1, 0, 1}, 3)) == 0);

  Rng rng(14);
  for (int trial = 0; trial < 500; ++trial) {
    const TernaryCode a = testing::random_code(16, 5, rng);
    const TernaryCode b = testing::random_code(16, 5, rng);
    CHECK(correlation(a, b) == oracle::correlation(a, b));
    CHECK(squared_distance(a, b) == oracle::squared_distance(a, b));
    CHECK(squared_distance(a, b) == 2 * 5 - 2 * correlation(a, b));
  }
  CHECK(category_of([&] { correlation(r, code({1, 0, 0}, 1)); }) ==
        ErrorCategory::kDimensionMismatch);
}

TEST_CASE("SignatureMatrix and ProjectionMatrix validate their invariants") {
  Matrix x = Matrix::Identity(3, 2);
  CHECK_NOTHROW(SignatureMatrix{x});
  x(0, 0) = 1.1;
  CHECK(category_of([&] { SignatureMatrix{x}; }) == ErrorCategory::kInvalidInput);
  CHECK(SignatureMatrix::normalized(x).column(0).norm() == doctest::Approx(1.0));

  CHECK_NOTHROW(ProjectionMatrix{Matrix::Identity(3, 2)});
  CHECK(category_of([] { ProjectionMatrix{Matrix::Identity(3, 3)}; }) ==
        ErrorCategory::kDimensionMismatch);
  Matrix skew = Matrix::Identity(3, 2);
  skew(2, 0) = 0.1;
  CHECK(category_of([&] { ProjectionMatrix{skew}; }) == ErrorCategory::kInvalidInput);
}

TEST_CASE("ModelConfig requires lambda > gamma > 0 and S < l < d") {
  ModelConfig c;
  CHECK_NOTHROW(c.validate(64, 128));
  c.gamma = c.lambda;
  CHECK(category_of([&] { c.validate(64, 128); }) == ErrorCategory::kConfig);
  c = ModelConfig{};
  c.code_length = 64;
  CHECK(category_of([&] { c.validate(64, 128); }) == ErrorCategory::kConfig);
  c = ModelConfig{};
  c.groups = 200;
  CHECK(category_of([&] { c.validate(64, 128); }) == ErrorCategory::kConfig);
}

TEST_CASE("random_orthonormal has orthonormal columns") {
  Rng rng(15);
  const Matrix w = random_orthonormal(16, 8, rng);
  CHECK((w.transpose() * w - Matrix::Identity(8, 8)).norm() < 1e-12);
}
