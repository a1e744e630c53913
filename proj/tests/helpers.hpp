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

#include <vector>

#include "doctest.h"
#include "gmk/core.hpp"
#include "gmk/error.hpp"
#include "gmk/random.hpp"

namespace gmk::testing {

inline TernaryCode code(std::vector<int> values, int sparsity) {
  return TernaryCode(std::vector<std::int8_t>(values.begin(), values.end()), sparsity);
}

inline TernaryCode random_code(Index length, int sparsity, Rng& rng) {
  Vector v(length);
  for (Index i = 0; i < length; ++i) v(i) = standard_normal(rng);
  return ternarize(v, sparsity);
}

inline SignatureMatrix random_signatures(Index dim, Index count, Rng& rng) {
  return SignatureMatrix::normalized(gaussian_matrix(dim, count, rng));
}

template <typename F>
ErrorCategory category_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  FAIL("expected a gmk::Error");
  return ErrorCategory::kUsage;
}

}  // namespace gmk::testing
