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

#include "gmk/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "gmk/error.hpp"
#include "gmk/model_io.hpp"
#include "gmk/random.hpp"

namespace gmk {

void SyntheticSpec::validate() const {
  require(num_identities >= 2, ErrorCategory::kConfig, "num_identities must be >= 2");
  require(samples_per_identity >= 2, ErrorCategory::kConfig,
          "samples_per_identity must be >= 2");
  require(dim >= 2, ErrorCategory::kConfig, "d must be >= 2");
  require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), ErrorCategory::kConfig,
          "noise_sigma must be nonnegative");
  require(impostor_fraction > 0.0 && impostor_fraction < 1.0, ErrorCategory::kConfig,
          "impostor_fraction must lie in (0, 1)");
  require(impostor_identities() >= 1 && enrolled_identities() >= 1,
          ErrorCategory::kConfig, "split leaves no enrolled or no impostor identity");
}

int SyntheticSpec::impostor_identities() const {
  return static_cast<int>(std::lround(impostor_fraction * num_identities));
}

int SyntheticSpec::enrolled_identities() const {
  return num_identities - impostor_identities();
}

Dataset generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int enrolled = spec.enrolled_identities();
  const int impostors = spec.impostor_identities();
  const int per = spec.samples_per_identity;

  Matrix templates(spec.dim, enrolled);
  Matrix genuine(spec.dim, enrolled * (per - 1));
  std::vector<int> genuine_identity;
  Matrix impostor_samples(spec.dim, impostors * per);

  auto draw_sample = [&](const Vector& mean) {
    Vector s = mean;
    for (Index k = 0; k < s.size(); ++k) s(k) += spec.noise_sigma * standard_normal(rng);
    return Vector(s / s.norm());
  };

  Index next_genuine = 0;
  Index next_impostor = 0;
  for (int id = 0; id < spec.num_identities; ++id) {
    Vector mean = gaussian_matrix(spec.dim, 1, rng).col(0);
    mean /= mean.norm();
    for (int s = 0; s < per; ++s) {
      const Vector sample = spec.noise_sigma == 0.0 ? mean : draw_sample(mean);
      if (id >= enrolled) {
        impostor_samples.col(next_impostor++) = sample;
      } else if (s == 0) {
        templates.col(id) = sample;
      } else {
        genuine.col(next_genuine++) = sample;
        genuine_identity.push_back(id);
      }
    }
  }
  return Dataset{SignatureMatrix(std::move(templates)), SignatureMatrix(std::move(genuine)),
                 std::move(genuine_identity), SignatureMatrix(std::move(impostor_samples))};
}

namespace {

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line,
                              const std::string& what) {
  fail(ErrorCategory::kParse,
       path.string() + ": row " + std::to_string(line) + ": " + what);
}

}  // namespace

void save_matrix(const std::filesystem::path& path, const Matrix& records) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
  out << "# d=" << records.cols() << " n=" << records.rows() << '\n';
  for (Index i = 0; i < records.rows(); ++i) {
    for (Index j = 0; j < records.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(records(i, j));
    }
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorCategory::kIo, "write failed: " + path.string());
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot read " + path.string());

  long header_cols = -1;
  long header_rows = -1;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (rows.empty() && line_no == 1 &&
          std::sscanf(line.c_str(), "# d=%ld n=%ld", &header_cols, &header_rows) != 2) {
        header_cols = header_rows = -1;
      }
      continue;
    }
    std::vector<double> values;
    std::size_t start = 0;
    std::size_t column = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::size_t end = comma == std::string::npos ? line.size() : comma;
      std::size_t first = start;
      std::size_t last = end;
      while (first < last && line[first] == ' ') ++first;
      while (last > first && line[last - 1] == ' ') --last;
      double value = 0.0;
      const auto result = std::from_chars(line.data() + first, line.data() + last, value);
      if (first == last || result.ec != std::errc() || result.ptr != line.data() + last) {
        parse_error(path, line_no,
                    "column " + std::to_string(column + 1) + ": not a number");
      }
      values.push_back(value);
      ++column;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      parse_error(path, line_no,
                  "expected " + std::to_string(rows.front().size()) + " columns, found " +
                      std::to_string(values.size()));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) parse_error(path, line_no, "no data rows");
  const std::size_t cols = rows.front().size();
  if (header_cols >= 0 && (static_cast<std::size_t>(header_cols) != cols ||
                           static_cast<std::size_t>(header_rows) != rows.size())) {
    parse_error(path, 1, "header dimensions disagree with the data");
  }

  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return out;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  save_matrix(dir / "enrolled.csv", dataset.enrolled.matrix().transpose());
  Matrix genuine(dataset.genuine.count(), dataset.genuine.dim() + 1);
  for (Index i = 0; i < dataset.genuine.count(); ++i) {
    genuine(i, 0) = dataset.genuine_identity[static_cast<std::size_t>(i)];
    genuine.row(i).tail(dataset.genuine.dim()) = dataset.genuine.column(i).transpose();
  }
  save_matrix(dir / "genuine.csv", genuine);
  save_matrix(dir / "impostors.csv", dataset.impostors.matrix().transpose());
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Matrix enrolled = load_matrix(dir / "enrolled.csv").transpose();
  const Matrix genuine = load_matrix(dir / "genuine.csv");
  Matrix impostors = load_matrix(dir / "impostors.csv").transpose();
  require(genuine.cols() == enrolled.rows() + 1 && impostors.rows() == enrolled.rows(),
          ErrorCategory::kParse, "dataset files disagree on the signature dimension");

  std::vector<int> identity(static_cast<std::size_t>(genuine.rows()));
  for (Index i = 0; i < genuine.rows(); ++i) {
    const double id = genuine(i, 0);
    require(id >= 0 && id < static_cast<double>(enrolled.cols()) && std::floor(id) == id,
            ErrorCategory::kParse,
            "genuine.csv row " + std::to_string(i + 1) + ": bad identity column");
    identity[static_cast<std::size_t>(i)] = static_cast<int>(id);
  }
  return Dataset{SignatureMatrix(std::move(enrolled)),
                 SignatureMatrix(genuine.rightCols(genuine.cols() - 1).transpose()),
                 std::move(identity), SignatureMatrix(std::move(impostors))};
}

}  // namespace gmk
