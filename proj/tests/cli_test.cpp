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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gmk/cli.hpp"
#include "gmk/config.hpp"
#include "gmk/data.hpp"
#include "gmk/eval.hpp"
#include "gmk/model_io.hpp"
#include "gmk/protocol.hpp"
#include "helpers.hpp"

using namespace gmk;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result gmk_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gmk_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small but non-trivial configuration shared by the CLI tests.
std::vector<std::string> small(const fs::path& dir) {
  return {"--data.dir=" + (dir / "data").string(),
          "--num_identities=40",
          "--d=16",
          "--ell=8",
          "--sparsity=3",
          "--groups=4",
          "--max_outer_iters=5",
          "--model.out=" + (dir / "model.txt").string(),
          "--eval.out=" + (dir / "results").string(),
          "--protocol.model=" + (dir / "model.txt").string(),
          "--protocol.out=" + (dir / "transcript.bin").string(),
          "--additive_bits=64"};
}

Result command(const std::string& name, const fs::path& dir, std::vector<std::string> extra = {}) {
  std::vector<std::string> args = {name};
  for (auto& a : small(dir)) args.push_back(a);
  for (auto& a : extra) args.push_back(a);
  return gmk_run(args);
}

}  // namespace

TEST_CASE("config text layers sections, comments and bare keys") {
  KeyValueConfig c = KeyValueConfig::defaults();
  c.merge_text("# comment\n[model]\nell = 16\n; other\n[data]\nseed=9\n", "test");
  CHECK(c.get_int("model.ell") == 16);
  CHECK(c.get_u64("data.seed") == 9);
  c.set("seed", "4");
  CHECK(c.get_u64("data.seed") == 4);
  CHECK(c.get_u64("model.seed") == 4);
  CHECK(c.get_u64("protocol.seed") == 4);
  CHECK(testing::category_of([&] { c.set("nope", "1"); }) == ErrorCategory::kConfig);
  CHECK(testing::category_of([&] { c.merge_text("[model]\nell\n", "t"); }) == ErrorCategory::kConfig);
  c.set("model.ell", "abc");
  CHECK(testing::category_of([&] { c.get_int("model.ell"); }) == ErrorCategory::kConfig);
  c.set("eval.sweep_m", "2, 8,32");
  CHECK(c.get_int_list("eval.sweep_m") == std::vector<int>{2, 8, 32});
  CHECK(c.get_double_list("eval.sweep_s").empty());
}

TEST_CASE("errors are reported with a category prefix and nonzero exit") {
  const auto none = gmk_run({});
  CHECK(none.code != 0);
  CHECK(none.err.rfind("ERROR:usage:", 0) == 0);

  const auto unknown = gmk_run({"frobnicate"});
  CHECK(unknown.code != 0);
  CHECK(unknown.err.rfind("ERROR:usage:", 0) == 0);

  const auto bad_key = gmk_run({"gen-data", "--no_such_key=1"});
  CHECK(bad_key.code != 0);
  CHECK(bad_key.err.rfind("ERROR:config:", 0) == 0);

  const fs::path dir = fresh_dir("errors");
  const auto bad_spec = command("gen-data", dir, {"--samples_per_identity=1"});
  CHECK(bad_spec.code != 0);
  CHECK(bad_spec.err.rfind("ERROR:config:", 0) == 0);

  const auto missing = command("train", dir);
  CHECK(missing.code != 0);
  CHECK(missing.err.rfind("ERROR:io:", 0) == 0);

  CHECK(gmk_run({"--help"}).code == 0);
}

TEST_CASE("gen-data creates the directory and is byte-stable") {
  const fs::path dir = fresh_dir("gen");
  REQUIRE(command("gen-data", dir).code == 0);
  const std::string first = slurp(dir / "data" / "enrolled.csv");
  REQUIRE(command("gen-data", dir).code == 0);
  CHECK(slurp(dir / "data" / "enrolled.csv") == first);
  CHECK(fs::exists(dir / "data" / "genuine.csv"));
  CHECK(fs::exists(dir / "data" / "impostors.csv"));
}

TEST_CASE("train writes a model and log; baseline keeps Y fixed") {
  const fs::path dir = fresh_dir("train");
  REQUIRE(command("gen-data", dir).code == 0);
  const auto r = command("train", dir);
  REQUIRE(r.code == 0);
  const std::string model = slurp(dir / "model.txt");
  CHECK(r.out.find("final within_trace=") != std::string::npos);
  CHECK(fs::exists(dir / "model.txt.log"));
  REQUIRE(command("train", dir).code == 0);
  CHECK(slurp(dir / "model.txt") == model);

  const auto singles = command("train", dir, {"--groups=32", "--lambda=10", "--gamma=1"});
  REQUIRE(singles.code == 0);
  CHECK(singles.out.find("final within_trace=0\n") != std::string::npos);

  REQUIRE(command("train", dir, {"--baseline=1", "--group_size=8"}).code == 0);
  const Model base = load_model(dir / "model.txt");
  CHECK(base.fixed_assignment);
  CHECK(base.assignment.groups() == 4);

  const auto bad = command("train", dir, {"--group_size=7"});
  CHECK(bad.err.rfind("ERROR:sizing:", 0) == 0);
}

TEST_CASE("GMK_SEED overrides the config file but not flags") {
  const fs::path dir = fresh_dir("seed");
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "[data]\nseed=5\n";
  const std::string cfg_flag = "--config=" + cfg.string();

  REQUIRE(command("gen-data", dir, {cfg_flag}).code == 0);
  const std::string from_file = slurp(dir / "data" / "enrolled.csv");

  setenv("GMK_SEED", "6", 1);
  REQUIRE(command("gen-data", dir, {cfg_flag}).code == 0);
  const std::string from_env = slurp(dir / "data" / "enrolled.csv");
  REQUIRE(command("gen-data", dir, {cfg_flag, "--data.seed=5"}).code == 0);
  const std::string from_flag = slurp(dir / "data" / "enrolled.csv");
  unsetenv("GMK_SEED");

  REQUIRE(command("gen-data", dir, {"--data.seed=6"}).code == 0);
  CHECK(from_env == slurp(dir / "data" / "enrolled.csv"));
  CHECK(from_env != from_file);
  CHECK(from_flag == from_file);
}

TEST_CASE("eval commands emit plot-ready CSV consistent with the library") {
  const fs::path dir = fresh_dir("eval");
  REQUIRE(command("gen-data", dir).code == 0);
  REQUIRE(command("train", dir).code == 0);
  const std::string model_flag = "--eval.model=" + (dir / "model.txt").string();

  const auto v = command("eval-verify", dir, {model_flag});
  REQUIRE(v.code == 0);
  CHECK(v.out.rfind("m,S,lambda,gamma,M,", 0) == 0);
  CHECK(fs::exists(dir / "results" / "verify.csv"));
  CHECK(fs::exists(dir / "results" / "verify_roc.csv"));

  // Recomputing from the saved model equals the in-memory run.
  const Dataset data = load_dataset(dir / "data");
  const Model model = load_model(dir / "model.txt");
  const QuerySet qs = make_query_set(data, model);
  const double pfn = pfn_at_pfp(verification_sweep(model, qs, 7), 0.05);
  CHECK(v.out.find("," + format_double(pfn) + ",") != std::string::npos);

  const auto s = command("eval-security", dir, {model_flag});
  REQUIRE(s.code == 0);
  const auto rep = security_report(data.enrolled, qs, model);
  CHECK(s.out.find(format_double(rep.mse_security) + "," + format_double(rep.mse_privacy)) !=
        std::string::npos);

  const auto sweep = command("eval-identify", dir, {"--sweep_m=4,8", "--sweep_s=2,3"});
  REQUIRE(sweep.code == 0);
  const std::string index = slurp(dir / "results" / "identify.csv");
  CHECK(std::count(index.begin(), index.end(), '\n') == 5);
  CHECK(fs::exists(dir / "results" / "identify_m4_S2_l0.5_g0.05.csv"));
  CHECK(fs::exists(dir / "results" / "identify_m8_S3_l0.5_g0.05.csv"));

  // One group: never misidentified.
  const auto one = command("eval-identify", dir, {"--groups=1"});
  REQUIRE(one.code == 0);
  const std::string row = one.out.substr(one.out.find('\n') + 1);
  std::vector<std::string> cells;
  std::stringstream ss(row);
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  REQUIRE(cells.size() >= 9);
  CHECK(cells[8] == "0");

  const auto bad = command("eval-identify", dir, {"--sweep_m=7"});
  CHECK(bad.code != 0);
  CHECK(bad.err.rfind("ERROR:sizing:", 0) == 0);
}

TEST_CASE("separable toy data verifies with zero error") {
  const fs::path dir = fresh_dir("separable");
  // One group per identity and enough code length to keep them apart.
  const std::vector<std::string> wide = {"--d=64", "--ell=32", "--sparsity=8", "--groups=32"};
  auto with = [&](std::vector<std::string> extra) {
    extra.insert(extra.end(), wide.begin(), wide.end());
    return extra;
  };
  REQUIRE(command("gen-data", dir, with({"--noise_sigma=0"})).code == 0);
  REQUIRE(command("train", dir, with({})).code == 0);
  const auto v = command("eval-verify", dir, with({"--eval.model=" + (dir / "model.txt").string()}));
  REQUIRE(v.code == 0);
  std::stringstream ss(v.out.substr(v.out.find('\n') + 1));
  std::vector<std::string> cells;
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  REQUIRE(cells.size() >= 8);
  CHECK(cells[7] == "0");
}

TEST_CASE("protocol-demo agrees with the plaintext decision and is deterministic") {
  const fs::path dir = fresh_dir("protocol");
  REQUIRE(command("gen-data", dir).code == 0);
  REQUIRE(command("train", dir, {"--groups=32", "--lambda=10", "--gamma=1"}).code == 0);

  const auto accept = command("protocol-demo", dir, {"--tau=0", "--query_index=3"});
  REQUIRE(accept.code == 0);
  CHECK(accept.out.rfind("decision=accept plaintext=accept", 0) == 0);
  const std::string transcript = slurp(dir / "transcript.bin");
  REQUIRE(command("protocol-demo", dir, {"--tau=0", "--query_index=3"}).code == 0);
  CHECK(slurp(dir / "transcript.bin") == transcript);
  CHECK(protocol::ProtocolTranscript::load(dir / "transcript.bin").messages.size() == 5);

  const auto reject = command("protocol-demo", dir, {"--tau=-1"});
  CHECK(reject.out.rfind("decision=reject plaintext=reject", 0) == 0);

  const Model model = load_model(dir / "model.txt");
  const Dataset data = load_dataset(dir / "data");
  for (const int tau : {4, 8, 12}) {
    const auto r = command("protocol-demo", dir,
                           {"--source=genuine", "--query_index=2", "--tau=" + std::to_string(tau)});
    REQUIRE(r.code == 0);
    const auto p = embed(model.projection, data.genuine.column(2), model.config.sparsity);
    const bool expected = identify(model, p, tau).has_value();
    CHECK((r.out.rfind(expected ? "decision=accept" : "decision=reject", 0) == 0));
  }

  const auto bad = command("protocol-demo", dir, {"--source=elsewhere"});
  CHECK(bad.err.rfind("ERROR:usage:", 0) == 0);
}
