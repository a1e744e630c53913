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

#include "gmk/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "gmk/error.hpp"

namespace gmk {

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

namespace {

template <typename T>
T parse_number(std::string_view text, std::size_t line) {
  T value{};
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  require(result.ec == std::errc() && result.ptr == text.data() + text.size(),
          ErrorCategory::kParse,
          "model line " + std::to_string(line) + ": bad number '" + std::string(text) + "'");
  return value;
}

template <typename T>
std::vector<T> parse_row(const std::string& text, std::size_t line) {
  std::vector<T> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string::npos ? text.size() : comma;
    out.push_back(parse_number<T>(std::string_view(text).substr(start, end - start), line));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Section {
  std::string name;
  std::map<std::string, long> attrs;
  std::vector<std::pair<std::size_t, std::string>> lines;
};

std::vector<Section> split_sections(const std::string& text) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      require(line.back() == ']', ErrorCategory::kParse,
              "model line " + std::to_string(line_no) + ": unterminated section header");
      std::istringstream header(line.substr(1, line.size() - 2));
      Section s;
      header >> s.name;
      std::string attr;
      while (header >> attr) {
        const auto eq = attr.find('=');
        require(eq != std::string::npos, ErrorCategory::kParse,
                "model line " + std::to_string(line_no) + ": bad attribute");
        s.attrs[attr.substr(0, eq)] = parse_number<long>(attr.substr(eq + 1), line_no);
      }
      sections.push_back(std::move(s));
      continue;
    }
    require(!sections.empty(), ErrorCategory::kParse,
            "model line " + std::to_string(line_no) + ": data outside a section");
    sections.back().lines.emplace_back(line_no, line);
  }
  return sections;
}

const Section& find(const std::vector<Section>& sections, const std::string& name) {
  for (const auto& s : sections)
    if (s.name == name) return s;
  fail(ErrorCategory::kParse, "model is missing section [" + name + "]");
}

long attr(const Section& s, const std::string& key) {
  const auto it = s.attrs.find(key);
  require(it != s.attrs.end(), ErrorCategory::kParse,
          "section [" + s.name + "] lacks attribute " + key);
  return it->second;
}

void write_codes(std::ostringstream& out, const std::string& name, const CodeMatrix& codes) {
  out << '[' << name << " length=" << codes.code_length() << " count=" << codes.count()
      << " sparsity=" << codes.sparsity() << "]\n";
  for (const auto& code : codes.columns()) {
    const auto symbols = code.symbols();
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (i > 0) out << ',';
      out << static_cast<int>(symbols[i]);
    }
    out << '\n';
  }
}

CodeMatrix read_codes(const Section& s) {
  const long length = attr(s, "length");
  const long count = attr(s, "count");
  const int sparsity = static_cast<int>(attr(s, "sparsity"));
  require(static_cast<long>(s.lines.size()) == count, ErrorCategory::kParse,
          "section [" + s.name + "] has the wrong number of codes");
  std::vector<TernaryCode> codes;
  for (const auto& [line_no, text] : s.lines) {
    const auto values = parse_row<int>(text, line_no);
    require(static_cast<long>(values.size()) == length, ErrorCategory::kParse,
            "model line " + std::to_string(line_no) + ": wrong code length");
    std::vector<std::int8_t> symbols(values.begin(), values.end());
    codes.emplace_back(std::move(symbols), sparsity);
  }
  return CodeMatrix(std::move(codes));
}

}  // namespace

std::string format_model(const Model& model) {
  std::ostringstream out;
  const auto& c = model.config;
  out << "# gmk model v1\n[config]\n"
      << "code_length=" << c.code_length << '\n'
      << "sparsity=" << c.sparsity << '\n'
      << "groups=" << c.groups << '\n'
      << "lambda=" << format_double(c.lambda) << '\n'
      << "gamma=" << format_double(c.gamma) << '\n'
      << "max_outer_iters=" << c.max_outer_iters << '\n'
      << "convergence_tol=" << format_double(c.convergence_tol) << '\n'
      << "seed=" << c.seed << '\n'
      << "fixed_assignment=" << (model.fixed_assignment ? 1 : 0) << '\n';

  const Matrix& w = model.projection.matrix();
  out << "[projection rows=" << w.rows() << " cols=" << w.cols() << "]\n";
  for (Index i = 0; i < w.rows(); ++i) {
    for (Index j = 0; j < w.cols(); ++j) out << (j > 0 ? "," : "") << format_double(w(i, j));
    out << '\n';
  }
  write_codes(out, "codes", model.codes);
  write_codes(out, "representations", model.representations);

  out << "[assignment count=" << model.assignment.count()
      << " groups=" << model.assignment.groups() << "]\n";
  for (Index i = 0; i < model.assignment.count(); ++i)
    out << (i > 0 ? "," : "") << model.assignment.group_of(i);
  out << '\n';

  out << "[trace count=" << model.objective_trace.size() << "]\n";
  for (const auto& t : model.objective_trace)
    out << format_double(t.embedding_cost) << ',' << format_double(t.within_trace) << ','
        << format_double(t.between_trace) << ',' << format_double(t.total) << '\n';
  return out.str();
}

Model parse_model(const std::string& text) {
  const auto sections = split_sections(text);

  ModelConfig config;
  bool fixed = false;
  for (const auto& [line_no, line] : find(sections, "config").lines) {
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCategory::kParse,
            "model line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "code_length") config.code_length = parse_number<int>(value, line_no);
    else if (key == "sparsity") config.sparsity = parse_number<int>(value, line_no);
    else if (key == "groups") config.groups = parse_number<int>(value, line_no);
    else if (key == "lambda") config.lambda = parse_number<double>(value, line_no);
    else if (key == "gamma") config.gamma = parse_number<double>(value, line_no);
    else if (key == "max_outer_iters") config.max_outer_iters = parse_number<int>(value, line_no);
    else if (key == "convergence_tol") config.convergence_tol = parse_number<double>(value, line_no);
    else if (key == "seed") config.seed = parse_number<std::uint64_t>(value, line_no);
    else if (key == "fixed_assignment") fixed = parse_number<int>(value, line_no) != 0;
    else fail(ErrorCategory::kParse, "model line " + std::to_string(line_no) + ": unknown key " + key);
  }

  const Section& proj = find(sections, "projection");
  const long rows = attr(proj, "rows");
  const long cols = attr(proj, "cols");
  require(static_cast<long>(proj.lines.size()) == rows, ErrorCategory::kParse,
          "projection has the wrong number of rows");
  Matrix w(rows, cols);
  for (long i = 0; i < rows; ++i) {
    const auto& [line_no, line] = proj.lines[static_cast<std::size_t>(i)];
    const auto values = parse_row<double>(line, line_no);
    require(static_cast<long>(values.size()) == cols, ErrorCategory::kParse,
            "model line " + std::to_string(line_no) + ": wrong projection width");
    for (long j = 0; j < cols; ++j) w(i, j) = values[static_cast<std::size_t>(j)];
  }

  const Section& assign = find(sections, "assignment");
  require(assign.lines.size() == 1, ErrorCategory::kParse, "assignment must be one line");
  auto groups = parse_row<int>(assign.lines.front().second, assign.lines.front().first);
  require(static_cast<long>(groups.size()) == attr(assign, "count"), ErrorCategory::kParse,
          "assignment has the wrong length");

  std::vector<ObjectiveBreakdown> trace;
  for (const auto& [line_no, line] : find(sections, "trace").lines) {
    const auto v = parse_row<double>(line, line_no);
    require(v.size() == 4, ErrorCategory::kParse,
            "model line " + std::to_string(line_no) + ": trace rows need 4 values");
    trace.push_back({v[0], v[1], v[2], v[3]});
  }

  return Model{ProjectionMatrix(std::move(w)), read_codes(find(sections, "codes")),
               read_codes(find(sections, "representations")),
               AssignmentMatrix(std::move(groups), static_cast<int>(attr(assign, "groups"))),
               config, std::move(trace), fixed};
}

void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
  out << format_model(model);
  require(static_cast<bool>(out), ErrorCategory::kIo, "write failed: " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str());
}

}  // namespace gmk
