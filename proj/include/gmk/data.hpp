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
#include <filesystem>
#include <vector>

#include "gmk/core.hpp"

namespace gmk {

struct SyntheticSpec {
  int num_identities = 160;
  int samples_per_identity = 3;
  int dim = 64;
  double noise_sigma = 0.15;
  double impostor_fraction = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
  int impostor_identities() const;
  int enrolled_identities() const;
};

struct Dataset {
  SignatureMatrix enrolled;          // d x N, one template per enrolled identity
  SignatureMatrix genuine;           // d x Nq, held-out samples of enrolled identities
  std::vector<int> genuine_identity; // enrolled column of each genuine sample
  SignatureMatrix impostors;         // samples of identities never enrolled
};

// Identity means are uniform on the unit sphere; each sample is
// normalize(mean + N(0, sigma^2 I)). The first sample of each enrolled
// identity is its template, the rest become genuine queries. The last
// impostor_identities() identities supply the impostor samples.
Dataset generate(const SyntheticSpec& spec);

// CSV with one record per line and an optional "# d=<cols> n=<rows>" header.
// Values are written in shortest round-trip form.
void save_matrix(const std::filesystem::path& path, const Matrix& records);
Matrix load_matrix(const std::filesystem::path& path);

// Dataset bundle: enrolled.csv, genuine.csv (identity column first),
// impostors.csv.
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace gmk
