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

#include <filesystem>
#include <string>

#include "gmk/learning.hpp"

namespace gmk {

// Sectioned text format:
//   [config]                        key=value lines
//   [projection rows=d cols=l]      W, one CSV row per matrix row
//   [codes length=l count=N]        E, one ternary code per line
//   [representations length=l count=M]
//   [assignment count=N groups=M]   one line of group indices
//   [trace count=T]                 embedding_cost,within,between,total
std::string format_model(const Model& model);
Model parse_model(const std::string& text);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace gmk
