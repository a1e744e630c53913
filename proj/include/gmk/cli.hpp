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

#include <ostream>
#include <string>
#include <vector>

namespace gmk::cli {

// gmk <command> [--config=FILE] [--key=value ...]
//
// Commands: gen-data, train, eval-verify, eval-identify, eval-security,
// protocol-demo. Precedence of settings: built-in defaults, config file,
// GMK_SEED (every *.seed key), then command-line flags. Returns the process
// exit code; failures print "ERROR:<category>: message" to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gmk::cli
