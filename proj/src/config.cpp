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

#include "gmk/config.hpp"

#include <charconv>
#include <sstream>

#include "gmk/error.hpp"

namespace gmk {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T value{};
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  require(!text.empty() && result.ec == std::errc() && result.ptr == text.data() + text.size(),
          ErrorCategory::kConfig, "key " + key + ": cannot parse '" + text + "'");
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  if (trim(text).empty()) return out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_value<T>(key, trim(item)));
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::defaults() {
  KeyValueConfig c;
  c.values_ = {
      {"data.dir", "dataset"},
      {"data.num_identities", "160"},
      {"data.samples_per_identity", "3"},
      {"data.d", "64"},
      {"data.noise_sigma", "0.15"},
      {"data.impostor_fraction", "0.2"},
      {"data.seed", "1"},
      {"model.ell", "32"},
      {"model.sparsity", "8"},
      {"model.groups", "16"},
      {"model.group_size", "0"},
      {"model.lambda", "0.5"},
      {"model.gamma", "0.05"},
      {"model.max_outer_iters", "30"},
      {"model.convergence_tol", "1e-6"},
      {"model.seed", "1"},
      {"model.baseline", "0"},
      {"model.out", "model.txt"},
      {"eval.model", ""},
      {"eval.sweep_m", ""},
      {"eval.sweep_s", ""},
      {"eval.sweep_lambda", ""},
      {"eval.sweep_gamma", ""},
      {"eval.target_pfp", "0.05"},
      {"eval.seed", "7"},
      {"eval.out", "results"},
      {"protocol.model", "model.txt"},
      {"protocol.source", "code"},
      {"protocol.query_index", "0"},
      {"protocol.tau", "0"},
      {"protocol.seed", "1"},
      {"protocol.additive_bits", "128"},
      {"protocol.multiplicative_bits", "0"},
      {"protocol.mask_a_max", "65536"},
      {"protocol.mask_b_max", "4294967296"},
      {"protocol.out", "transcript.bin"},
  };
  return c;
}

void KeyValueConfig::merge_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      require(line.back() == ']', ErrorCategory::kConfig, where + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCategory::kConfig, where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    set(section.empty() ? key : section + "." + key, trim(line.substr(eq + 1)));
  }
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (key.find('.') != std::string::npos) {
    require(values_.count(key) != 0, ErrorCategory::kConfig, "unknown key " + key);
    values_[key] = value;
    return;
  }
  bool matched = false;
  for (auto& [name, slot] : values_) {
    if (name.substr(name.find('.') + 1) == key) {
      slot = value;
      matched = true;
    }
  }
  require(matched, ErrorCategory::kConfig, "unknown key " + key);
}

const std::string& KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  require(it != values_.end(), ErrorCategory::kConfig, "unknown key " + key);
  return it->second;
}

int KeyValueConfig::get_int(const std::string& key) const {
  return parse_value<int>(key, get(key));
}

std::int64_t KeyValueConfig::get_int64(const std::string& key) const {
  return parse_value<std::int64_t>(key, get(key));
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key) const {
  return parse_value<std::uint64_t>(key, get(key));
}

double KeyValueConfig::get_double(const std::string& key) const {
  return parse_value<double>(key, get(key));
}

bool KeyValueConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  fail(ErrorCategory::kConfig, "key " + key + ": expected a boolean, got '" + v + "'");
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key) const {
  return parse_list<int>(key, get(key));
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) const {
  return parse_list<double>(key, get(key));
}

}  // namespace gmk
