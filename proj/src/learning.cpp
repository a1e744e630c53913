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

#include "gmk/learning.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gmk/error.hpp"
#include "gmk/kernels.hpp"

namespace gmk {

CodeMatrix::CodeMatrix(std::vector<TernaryCode> columns)
    : columns_(std::move(columns)) {
  require(!columns_.empty(), ErrorCategory::kDimensionMismatch,
          "code matrix must have at least one column");
  const Index length = columns_.front().length();
  for (const auto& c : columns_)
    require(c.length() == length, ErrorCategory::kDimensionMismatch,
            "code matrix columns differ in length");
}

Matrix CodeMatrix::dense() const {
  Matrix out(code_length(), count());
  for (Index j = 0; j < count(); ++j) {
    const auto symbols = column(j).symbols();
    for (Index i = 0; i < code_length(); ++i)
      out(i, j) = symbols[static_cast<std::size_t>(i)];
  }
  return out;
}

AssignmentMatrix::AssignmentMatrix(std::vector<int> group_of, int groups)
    : group_of_(std::move(group_of)), groups_(groups) {
  require(groups_ >= 1, ErrorCategory::kGroupRange, "need at least one group");
  for (const int g : group_of_)
    require(g >= 0 && g < groups_, ErrorCategory::kGroupRange,
            "group index " + std::to_string(g) + " outside [0, " +
                std::to_string(groups_) + ")");
}

std::vector<Index> AssignmentMatrix::members(int group) const {
  std::vector<Index> out;
  for (Index i = 0; i < count(); ++i)
    if (group_of(i) == group) out.push_back(i);
  return out;
}

std::vector<Index> AssignmentMatrix::group_sizes() const {
  std::vector<Index> sizes(static_cast<std::size_t>(groups_), 0);
  for (const int g : group_of_) ++sizes[static_cast<std::size_t>(g)];
  return sizes;
}

Matrix AssignmentMatrix::dense() const {
  Matrix y = Matrix::Zero(groups_, count());
  for (Index i = 0; i < count(); ++i) y(group_of(i), i) = 1.0;
  return y;
}

namespace {

void check_codes_vs_signatures(const SignatureMatrix& signatures,
                               const HashMatrix& codes) {
  require(codes.count() == signatures.count(), ErrorCategory::kDimensionMismatch,
          "E has " + std::to_string(codes.count()) + " columns, X has " +
              std::to_string(signatures.count()));
}

void check_grouping(const HashMatrix& codes,
                    const GroupRepresentations& representations,
                    const AssignmentMatrix& assignment) {
  require(codes.count() == assignment.count(), ErrorCategory::kDimensionMismatch,
          "E and Y disagree on N");
  require(representations.count() == assignment.groups(),
          ErrorCategory::kDimensionMismatch, "R and Y disagree on M");
  require(codes.code_length() == representations.code_length(),
          ErrorCategory::kDimensionMismatch, "E and R disagree on l");
}

// R * Y without materializing Y.
Matrix spread_representations(const GroupRepresentations& representations,
                              const AssignmentMatrix& assignment) {
  const Matrix reps = representations.dense();
  Matrix out(reps.rows(), assignment.count());
  for (Index i = 0; i < assignment.count(); ++i)
    out.col(i) = reps.col(assignment.group_of(i));
  return out;
}

Matrix group_means(const Matrix& points, const std::vector<int>& group_of,
                   int groups) {
  Matrix sums = Matrix::Zero(points.rows(), groups);
  std::vector<Index> sizes(static_cast<std::size_t>(groups), 0);
  for (Index i = 0; i < points.cols(); ++i) {
    const int g = group_of[static_cast<std::size_t>(i)];
    sums.col(g) += points.col(i);
    ++sizes[static_cast<std::size_t>(g)];
  }
  for (int g = 0; g < groups; ++g) {
    require(sizes[static_cast<std::size_t>(g)] > 0, ErrorCategory::kSizing,
            "group " + std::to_string(g) + " is empty");
    sums.col(g) /= static_cast<double>(sizes[static_cast<std::size_t>(g)]);
  }
  return sums;
}

double kmeans_cost(const Matrix& points, const Matrix& centroids,
                   const std::vector<int>& group_of) {
  double cost = 0.0;
  for (Index i = 0; i < points.cols(); ++i)
    cost += (points.col(i) - centroids.col(group_of[static_cast<std::size_t>(i)]))
                .squaredNorm();
  return cost;
}

Matrix kmeans_plus_plus(const Matrix& points, int groups, Rng& rng) {
  const Index n = points.cols();
  Matrix centroids(points.rows(), groups);
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  std::vector<double> nearest(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::infinity());

  auto take = [&](Index i, int g) {
    chosen[static_cast<std::size_t>(i)] = true;
    centroids.col(g) = points.col(i);
    for (Index k = 0; k < n; ++k) {
      const double d = (points.col(k) - points.col(i)).squaredNorm();
      auto& slot = nearest[static_cast<std::size_t>(k)];
      if (d < slot) slot = d;
    }
  };

  take(static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(n))), 0);
  for (int g = 1; g < groups; ++g) {
    double total = 0.0;
    for (Index k = 0; k < n; ++k) total += nearest[static_cast<std::size_t>(k)];

    Index pick = -1;
    if (total > 0.0) {
      const double target = uniform_unit(rng) * total;
      double acc = 0.0;
      for (Index k = 0; k < n; ++k) {
        const double w = nearest[static_cast<std::size_t>(k)];
        if (w <= 0.0) continue;
        acc += w;
        pick = k;
        if (acc > target) break;
      }
    } else {
      // Every remaining point duplicates a centroid: pick an unused index.
      std::vector<Index> unused;
      for (Index k = 0; k < n; ++k)
        if (!chosen[static_cast<std::size_t>(k)]) unused.push_back(k);
      pick = unused[static_cast<std::size_t>(
          uniform_below(rng, static_cast<std::uint64_t>(unused.size())))];
    }
    take(pick, g);
  }
  return centroids;
}

// Moves, for every empty cluster, the point farthest from its centroid (among
// clusters with at least two members) into it. Each move drops that point's
// cost to zero, so the k-means objective cannot increase.
int reseed_empty_clusters(const Matrix& points, Matrix& centroids,
                          std::vector<int>& group_of,
                          std::vector<double>& distance) {
  const int groups = static_cast<int>(centroids.cols());
  std::vector<Index> sizes(static_cast<std::size_t>(groups), 0);
  for (const int g : group_of) ++sizes[static_cast<std::size_t>(g)];

  int reseeded = 0;
  for (int g = 0; g < groups; ++g) {
    if (sizes[static_cast<std::size_t>(g)] > 0) continue;
    Index far = -1;
    double far_dist = -1.0;
    for (Index i = 0; i < points.cols(); ++i) {
      const int owner = group_of[static_cast<std::size_t>(i)];
      if (sizes[static_cast<std::size_t>(owner)] < 2) continue;
      if (distance[static_cast<std::size_t>(i)] > far_dist) {
        far_dist = distance[static_cast<std::size_t>(i)];
        far = i;
      }
    }
    const int previous = group_of[static_cast<std::size_t>(far)];
    --sizes[static_cast<std::size_t>(previous)];
    ++sizes[static_cast<std::size_t>(g)];
    group_of[static_cast<std::size_t>(far)] = g;
    distance[static_cast<std::size_t>(far)] = 0.0;
    centroids.col(g) = points.col(far);
    ++reseeded;
  }
  return reseeded;
}

ProjectionMatrix procrustes(const SignatureMatrix& signatures,
                            const HashMatrix& codes, bool allow_deficient) {
  check_codes_vs_signatures(signatures, codes);
  const Index d = signatures.dim();
  const Index l = codes.code_length();
  require(l < d, ErrorCategory::kDimensionMismatch, "need l < d");

  const Matrix cross = signatures.matrix() * codes.dense().transpose();  // d x l
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? sigma(0) * 1e-10 : 0.0;
  Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > cutoff && sigma(rank) > 0.0) ++rank;

  if (rank < l && !allow_deficient) throw DegenerateProcrustesError(rank, l);

  const Matrix u_active = svd.matrixU().leftCols(rank);
  const Matrix& v = svd.matrixV();
  Matrix w = u_active * v.leftCols(rank).transpose();
  if (rank < l) {
    // Orthonormal basis of range(U_active)^perp, completed deterministically.
    Matrix basis(d, rank + d);
    basis << u_active, Matrix::Identity(d, d);
    Eigen::HouseholderQR<Matrix> qr(basis);
    const Matrix q = qr.householderQ();
    w += q.middleCols(rank, l - rank) * v.rightCols(l - rank).transpose();
  }
  return ProjectionMatrix(std::move(w));
}

ProjectionMatrix solve_w_with_retry(const SignatureMatrix& signatures,
                                    const HashMatrix& codes, int sparsity,
                                    Rng& rng) {
  try {
    return w_step(signatures, codes);
  } catch (const DegenerateProcrustesError&) {
  }
  const Matrix noise = gaussian_matrix(codes.code_length(), codes.count(), rng);
  const HashMatrix randomized(kernels::parallel::ternarize_columns(noise, sparsity));
  try {
    return w_step(signatures, randomized);
  } catch (const DegenerateProcrustesError&) {
  }
  // Structurally low-rank data (e.g. repeated signatures): every completion
  // of the singular directions is an equally good minimizer.
  return w_step_completed(signatures, codes);
}

std::vector<int> balanced_random_partition(Index count, int group_size, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);
  shuffle_in_place(order, rng);
  std::vector<int> group_of(static_cast<std::size_t>(count));
  for (std::size_t k = 0; k < order.size(); ++k)
    group_of[static_cast<std::size_t>(order[k])] = static_cast<int>(k) / group_size;
  return group_of;
}

}  // namespace

double embedding_cost(const SignatureMatrix& signatures,
                      const ProjectionMatrix& projection, const HashMatrix& codes) {
  check_codes_vs_signatures(signatures, codes);
  require(projection.dim() == signatures.dim() &&
              projection.code_length() == codes.code_length(),
          ErrorCategory::kDimensionMismatch, "W does not match X and E");
  return (codes.dense() - projection.matrix().transpose() * signatures.matrix())
      .squaredNorm();
}

ScatterTraces scatter_traces(const HashMatrix& codes,
                             const GroupRepresentations& representations,
                             const AssignmentMatrix& assignment) {
  check_grouping(codes, representations, assignment);
  const Matrix spread = spread_representations(representations, assignment);
  return {(codes.dense() - spread).squaredNorm(), spread.squaredNorm()};
}

ObjectiveBreakdown objective(const SignatureMatrix& signatures,
                             const ProjectionMatrix& projection,
                             const HashMatrix& codes,
                             const GroupRepresentations& representations,
                             const AssignmentMatrix& assignment, double lambda,
                             double gamma) {
  require(gamma > 0.0 && lambda > gamma, ErrorCategory::kConfig,
          "need lambda > gamma > 0");
  ObjectiveBreakdown out;
  out.embedding_cost = embedding_cost(signatures, projection, codes);
  const auto traces = scatter_traces(codes, representations, assignment);
  out.within_trace = traces.within;
  out.between_trace = traces.between;
  out.total = out.embedding_cost + lambda * out.within_trace - gamma * out.between_trace;
  return out;
}

ProjectionMatrix w_step(const SignatureMatrix& signatures, const HashMatrix& codes) {
  return procrustes(signatures, codes, /*allow_deficient=*/false);
}

ProjectionMatrix w_step_completed(const SignatureMatrix& signatures,
                                  const HashMatrix& codes) {
  return procrustes(signatures, codes, /*allow_deficient=*/true);
}

HashMatrix e_step(const ProjectionMatrix& projection,
                  const SignatureMatrix& signatures,
                  const GroupRepresentations& representations,
                  const AssignmentMatrix& assignment, double lambda, int sparsity) {
  require(lambda >= 0.0, ErrorCategory::kConfig, "lambda must be nonnegative");
  require(projection.dim() == signatures.dim(), ErrorCategory::kDimensionMismatch,
          "W and X disagree on d");
  require(assignment.count() == signatures.count() &&
              representations.count() == assignment.groups() &&
              representations.code_length() == projection.code_length(),
          ErrorCategory::kDimensionMismatch, "R, Y do not match W, X");
  Matrix relaxed = projection.matrix().transpose() * signatures.matrix();
  if (lambda != 0.0) relaxed += lambda * spread_representations(representations, assignment);
  return HashMatrix(kernels::parallel::ternarize_columns(relaxed, sparsity));
}

double ry_scale(double lambda, double gamma) {
  require(gamma > 0.0 && lambda > gamma, ErrorCategory::kConfig,
          "need lambda > gamma > 0");
  return lambda / (lambda - gamma);
}

RyStepResult ry_step(const HashMatrix& codes, double lambda, double gamma,
                     int groups, Rng& rng, const RyStepOptions& options) {
  const double scale = ry_scale(lambda, gamma);
  require(groups >= 1 && groups <= codes.count(), ErrorCategory::kConfig,
          "need 1 <= M <= N");
  require(options.restarts >= 1, ErrorCategory::kConfig, "need at least one k-means run");
  const Matrix points = scale * codes.dense();
  const Index n = points.cols();

  struct Run {
    Matrix centroids;
    std::vector<int> group_of;
    std::vector<double> trace;
    int iterations = 0;
    int reseeded = 0;
  };

  // Lloyd iterations from the given centroids (and optional prior grouping).
  auto lloyd = [&](Run run) {
    for (; run.iterations < options.max_iterations; ++run.iterations) {
      auto nearest = kernels::parallel::nearest_centroid(points, run.centroids);
      std::vector<int> next = std::move(nearest.index);
      double cost = 0.0;
      for (const double d : nearest.distance) cost += d;
      run.trace.push_back(cost);

      const int moved = reseed_empty_clusters(points, run.centroids, next, nearest.distance);
      if (moved > 0) {
        run.reseeded += moved;
        run.trace.push_back(kmeans_cost(points, run.centroids, next));
      }

      const bool stable = next == run.group_of;
      run.group_of = std::move(next);
      if (stable) break;

      run.centroids = group_means(points, run.group_of, groups);
      run.trace.push_back(kmeans_cost(points, run.centroids, run.group_of));
    }
    return run;
  };

  bool seeded = false;
  Run best;
  if (options.warm_start != nullptr) {
    require(options.warm_start->count() == n && options.warm_start->groups() == groups,
            ErrorCategory::kDimensionMismatch, "warm start does not match E, M");
    bool any_empty = false;
    for (const auto size : options.warm_start->group_sizes()) any_empty |= size == 0;
    // A previous grouping with an empty cluster cannot seed means.
    if (!any_empty) {
      Run start;
      start.group_of = options.warm_start->assignments();
      start.centroids = group_means(points, start.group_of, groups);
      start.trace.push_back(kmeans_cost(points, start.centroids, start.group_of));
      best = lloyd(std::move(start));
      seeded = true;
    }
  }
  if (!seeded) {
    for (int attempt = 0; attempt < options.restarts; ++attempt) {
      Run start;
      start.centroids = kmeans_plus_plus(points, groups, rng);
      Run done = lloyd(std::move(start));
      if (attempt == 0 || done.trace.back() < best.trace.back()) best = std::move(done);
    }
  }

  std::vector<TernaryCode> reps =
      kernels::parallel::ternarize_columns(best.centroids, codes.sparsity());
  return RyStepResult{GroupRepresentations(std::move(reps)),
                      AssignmentMatrix(std::move(best.group_of), groups),
                      std::move(best.trace), best.iterations, best.reseeded};
}

GroupRepresentations ry_step_fixed(const HashMatrix& codes, double lambda,
                                   double gamma, const AssignmentMatrix& assignment) {
  const double scale = ry_scale(lambda, gamma);
  require(assignment.count() == codes.count(), ErrorCategory::kDimensionMismatch,
          "E and Y disagree on N");
  const Matrix centroids =
      group_means(scale * codes.dense(), assignment.assignments(), assignment.groups());
  return GroupRepresentations(
      kernels::parallel::ternarize_columns(centroids, codes.sparsity()));
}

Model train(const SignatureMatrix& signatures, const ModelConfig& config) {
  config.validate(signatures.dim(), signatures.count());
  Rng rng(config.seed);

  const ProjectionMatrix initial(
      random_orthonormal(signatures.dim(), config.code_length, rng));
  HashMatrix codes(kernels::parallel::ternarize_columns(
      initial.matrix().transpose() * signatures.matrix(), config.sparsity));
  auto grouping = ry_step(codes, config.lambda, config.gamma, config.groups, rng);
  GroupRepresentations reps = std::move(grouping.representations);
  AssignmentMatrix assignment = std::move(grouping.assignment);
  ProjectionMatrix projection = initial;

  std::vector<ObjectiveBreakdown> trace;
  for (int it = 0; it < config.max_outer_iters; ++it) {
    projection = solve_w_with_retry(signatures, codes, config.sparsity, rng);
    codes = e_step(projection, signatures, reps, assignment, config.lambda,
                   config.sparsity);
    RyStepOptions options;
    options.warm_start = &assignment;
    auto step = ry_step(codes, config.lambda, config.gamma, config.groups, rng, options);
    reps = std::move(step.representations);
    assignment = std::move(step.assignment);

    trace.push_back(objective(signatures, projection, codes, reps, assignment,
                              config.lambda, config.gamma));
    if (trace.size() >= 2 &&
        std::abs(trace.back().total - trace[trace.size() - 2].total) <
            config.convergence_tol)
      break;
  }
  return Model{std::move(projection), std::move(codes), std::move(reps),
               std::move(assignment), config, std::move(trace), false};
}

Model train_random_assignment_baseline(const SignatureMatrix& signatures,
                                       const ModelConfig& config, int group_size) {
  const Index n = signatures.count();
  require(group_size >= 1 && n % group_size == 0 &&
              static_cast<Index>(config.groups) * group_size == n,
          ErrorCategory::kSizing,
          "need M * m == N (M=" + std::to_string(config.groups) +
              ", m=" + std::to_string(group_size) + ", N=" + std::to_string(n) + ")");
  config.validate(signatures.dim(), n);
  Rng rng(config.seed);

  const ProjectionMatrix initial(
      random_orthonormal(signatures.dim(), config.code_length, rng));
  HashMatrix codes(kernels::parallel::ternarize_columns(
      initial.matrix().transpose() * signatures.matrix(), config.sparsity));
  const AssignmentMatrix assignment(balanced_random_partition(n, group_size, rng),
                                    config.groups);
  GroupRepresentations reps = ry_step_fixed(codes, config.lambda, config.gamma, assignment);
  ProjectionMatrix projection = initial;

  std::vector<ObjectiveBreakdown> trace;
  for (int it = 0; it < config.max_outer_iters; ++it) {
    projection = solve_w_with_retry(signatures, codes, config.sparsity, rng);
    codes = e_step(projection, signatures, reps, assignment, config.lambda,
                   config.sparsity);
    reps = ry_step_fixed(codes, config.lambda, config.gamma, assignment);
    trace.push_back(objective(signatures, projection, codes, reps, assignment,
                              config.lambda, config.gamma));
    if (trace.size() >= 2 &&
        std::abs(trace.back().total - trace[trace.size() - 2].total) <
            config.convergence_tol)
      break;
  }
  return Model{std::move(projection), std::move(codes), std::move(reps),
               assignment, config, std::move(trace), true};
}

}  // namespace gmk
