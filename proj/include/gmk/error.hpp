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

#include <stdexcept>
#include <string>
#include <string_view>

namespace gmk {

enum class ErrorCategory {
  kInvalidSparsity,
  kInvalidInput,
  kDimensionMismatch,
  kConfig,
  kDegenerateProcrustes,
  kSizing,
  kGroupRange,
  kEmptyQuerySet,
  kParse,
  kIo,
  kPlaintextRange,
  kMaskRange,
  kEmbeddingOverflow,
  kProtocolIntegrity,
  kUsage,
};

// Stable, machine-parsable name used in "ERROR:<category>:" diagnostics.
std::string_view category_name(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

// Raised by the Procrustes solver when X*E^T has rank below the code length.
class DegenerateProcrustesError : public Error {
 public:
  DegenerateProcrustesError(long rank, long required);

  long rank() const noexcept { return rank_; }
  long required() const noexcept { return required_; }

 private:
  long rank_;
  long required_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& what) {
  throw Error(category, what);
}

inline void require(bool condition, ErrorCategory category,
                    const std::string& what) {
  if (!condition) fail(category, what);
}

}  // namespace gmk
