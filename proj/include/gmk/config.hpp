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
#include <map>
#include <string>
#include <vector>

namespace gmk {

// Flat "key=value" text with "[section]" headers. Keys are addressed as
// "section.key". Only keys declared in the schema are accepted.
class KeyValueConfig {
 public:
  // Every key known to the tool, with its default value.
  static KeyValueConfig defaults();

  // Layers a config file's contents on top of the current values.
  void merge_text(const std::string& text, const std::string& origin);

  // "section.key" sets one key; a bare "key" sets every section's key of
  // that name.
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::int64_t get_int64(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  // Comma-separated; empty string yields an empty list.
  std::vector<int> get_int_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace gmk
