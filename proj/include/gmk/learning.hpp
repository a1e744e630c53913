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

#include "gmk/core.hpp"
#include "gmk/random.hpp"

namespace gmk {

// l x K matrix of exactly-S ternary codes, one per column.
class CodeMatrix {
 public:
  CodeMatrix(std::vector<TernaryCode> columns);

  Index code_length() const noexcept { return columns_.front().length(); }
  int sparsity() const noexcept { return columns_.front().sparsity(); }
  Index count() const noexcept { return static_cast<Index>(columns_.size()); }

  const TernaryCode& column(Index i) const { return columns_[static_cast<std::size_t>(i)]; }
  const std::vector<TernaryCode>& columns() const noexcept { return columns_; }

  Matrix dense() const;

  friend bool operator==(const CodeMatrix&, const CodeMatrix&) = default;

 private:
  std::vector<TernaryCode> columns_;
};

using HashMatrix = CodeMatrix;            // E: one code per enrolled signature
using GroupRepresentations = CodeMatrix;  // R: one code per group

// Y stored as the group index of each signature.
class AssignmentMatrix {
 public:
  AssignmentMatrix(std::vector<int> group_of, int groups);

  int groups() const noexcept { return groups_; }
  Index count() const noexcept { return static_cast<Index>(group_of_.size()); }
  int group_of(Index i) const { return group_of_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& assignments() const noexcept { return group_of_; }

  std::vector<Index> members(int group) const;
  std::vector<Index> group_sizes() const;
  // M x N one-hot matrix.
  Matrix dense() const;

  friend bool operator==(const AssignmentMatrix&, const AssignmentMatrix&) = default;

 private:
  std::vector<int> group_of_;
  int groups_;
};

struct ObjectiveBreakdown {
  double embedding_cost = 0.0;
  double within_trace = 0.0;
  double between_trace = 0.0;
  double total = 0.0;
};

struct ScatterTraces {
  double within = 0.0;   // Tr S_w = ||E - RY||_F^2
  double between = 0.0;  // Tr S_b = ||RY||_F^2
};

struct Model {
  ProjectionMatrix projection;
  HashMatrix codes;
  GroupRepresentations representations;
  AssignmentMatrix assignment;
  ModelConfig config;
  std::vector<ObjectiveBreakdown> objective_trace;
  bool fixed_assignment = false;
};

// ||E - W^T X||_F^2.
double embedding_cost(const SignatureMatrix& signatures,
                      const ProjectionMatrix& projection, const HashMatrix& codes);

ScatterTraces scatter_traces(const HashMatrix& codes,
                             const GroupRepresentations& representations,
                             const AssignmentMatrix& assignment);

ObjectiveBreakdown objective(const SignatureMatrix& signatures,
                             const ProjectionMatrix& projection,
                             const HashMatrix& codes,
                             const GroupRepresentations& representations,
                             const AssignmentMatrix& assignment, double lambda,
                             double gamma);

// Orthogonal Procrustes: argmin ||E - W^T X||_F over W^T W = I, computed from
// the thin SVD of X E^T. Throws DegenerateProcrustesError when rank(X E^T) < l.
ProjectionMatrix w_step(const SignatureMatrix& signatures, const HashMatrix& codes);

// Same optimum, but completes missing singular directions instead of throwing.
// Any completion attains the same fit.
ProjectionMatrix w_step_completed(const SignatureMatrix& signatures,
                                  const HashMatrix& codes);

// E = T_S(W^T X + lambda * R Y), column by column.
HashMatrix e_step(const ProjectionMatrix& projection,
                  const SignatureMatrix& signatures,
                  const GroupRepresentations& representations,
                  const AssignmentMatrix& assignment, double lambda, int sparsity);

inline constexpr int kDefaultKMeansIterations = 100;

struct RyStepOptions {
  int max_iterations = kDefaultKMeansIterations;
  // Independent k-means++ seedings; the lowest final SSE wins. Unused with
  // a warm start.
  int restarts = 20;
  // Seeds the k-means centroids from these groups instead of k-means++.
  const AssignmentMatrix* warm_start = nullptr;
};

struct RyStepResult {
  GroupRepresentations representations;
  AssignmentMatrix assignment;
  // Real k-means objective sum_i ||c e_i - mu_g(i)||^2, recorded after every
  // assignment update, empty-cluster reseed and centroid update.
  std::vector<double> kmeans_trace;
  int iterations = 0;
  int reseeded_clusters = 0;
};

// Scaling c = lambda / (lambda - gamma) applied to the codes before k-means.
double ry_scale(double lambda, double gamma);

// k-means with k = M on c * e_i; each representation is T_S of its centroid.
// Empty clusters are reseeded with the point farthest from its centroid.
RyStepResult ry_step(const HashMatrix& codes, double lambda, double gamma,
                     int groups, Rng& rng, const RyStepOptions& options = {});

// Centroid update only, for a fixed assignment.
GroupRepresentations ry_step_fixed(const HashMatrix& codes, double lambda,
                                   double gamma, const AssignmentMatrix& assignment);

Model train(const SignatureMatrix& signatures, const ModelConfig& config);

// Same alternating loop but Y is a fixed random balanced partition into
// groups of `group_size`. Requires config.groups * group_size == N.
Model train_random_assignment_baseline(const SignatureMatrix& signatures,
                                       const ModelConfig& config, int group_size);

}  // namespace gmk
