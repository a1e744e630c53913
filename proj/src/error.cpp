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

#include "gmk/error.hpp"

namespace gmk {

std::string_view category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kInvalidSparsity: return "invalid-sparsity";
    case ErrorCategory::kInvalidInput: return "invalid-input";
    case ErrorCategory::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kDegenerateProcrustes: return "degenerate-procrustes";
    case ErrorCategory::kSizing: return "sizing";
    case ErrorCategory::kGroupRange: return "group-range";
    case ErrorCategory::kEmptyQuerySet: return "empty-query-set";
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kPlaintextRange: return "plaintext-range";
    case ErrorCategory::kMaskRange: return "mask-range";
    case ErrorCategory::kEmbeddingOverflow: return "embedding-overflow";
    case ErrorCategory::kProtocolIntegrity: return "protocol-integrity";
    case ErrorCategory::kUsage: return "usage";
  }
  return "unknown";
}

DegenerateProcrustesError::DegenerateProcrustesError(long rank, long required)
    : Error(ErrorCategory::kDegenerateProcrustes,
            "X*E^T has rank " + std::to_string(rank) + ", need " +
                std::to_string(required)),
      rank_(rank),
      required_(required) {}

}  // namespace gmk
