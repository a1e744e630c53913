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

#include "gmk/cli.hpp"

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "gmk/config.hpp"
#include "gmk/data.hpp"
#include "gmk/error.hpp"
#include "gmk/eval.hpp"
#include "gmk/learning.hpp"
#include "gmk/model_io.hpp"
#include "gmk/protocol.hpp"

namespace gmk::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kUsage =
    "usage: gmk <command> [--config=FILE] [--key=value ...]\n"
    "commands: gen-data, train, eval-verify, eval-identify, eval-security, protocol-demo\n";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCategory::kIo, "write failed: " + path.string());
}

KeyValueConfig load_settings(const std::vector<std::string>& flags) {
  KeyValueConfig config = KeyValueConfig::defaults();
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& flag : flags) {
    require(flag.rfind("--", 0) == 0 && flag.find('=') != std::string::npos,
            ErrorCategory::kUsage, "expected --key=value, got '" + flag + "'");
    const auto eq = flag.find('=');
    const std::string key = flag.substr(2, eq - 2);
    const std::string value = flag.substr(eq + 1);
    if (key == "config") {
      config.merge_text(read_file(value), value);
    } else {
      overrides.emplace_back(key, value);
    }
  }
  if (const char* env = std::getenv("GMK_SEED"); env != nullptr && *env != '\0') {
    config.set("seed", env);
  }
  for (const auto& [key, value] : overrides) config.set(key, value);
  return config;
}

SyntheticSpec synthetic_spec(const KeyValueConfig& c) {
  SyntheticSpec spec;
  spec.num_identities = c.get_int("data.num_identities");
  spec.samples_per_identity = c.get_int("data.samples_per_identity");
  spec.dim = c.get_int("data.d");
  spec.noise_sigma = c.get_double("data.noise_sigma");
  spec.impostor_fraction = c.get_double("data.impostor_fraction");
  spec.seed = c.get_u64("data.seed");
  return spec;
}

ModelConfig model_config(const KeyValueConfig& c, Index enrolled) {
  ModelConfig m;
  m.code_length = c.get_int("model.ell");
  m.sparsity = c.get_int("model.sparsity");
  m.groups = c.get_int("model.groups");
  m.lambda = c.get_double("model.lambda");
  m.gamma = c.get_double("model.gamma");
  m.max_outer_iters = c.get_int("model.max_outer_iters");
  m.convergence_tol = c.get_double("model.convergence_tol");
  m.seed = c.get_u64("model.seed");
  const int group_size = c.get_int("model.group_size");
  if (group_size > 0) {
    require(enrolled % group_size == 0, ErrorCategory::kSizing,
            "group_size " + std::to_string(group_size) + " does not divide N=" +
                std::to_string(enrolled));
    m.groups = static_cast<int>(enrolled / group_size);
  }
  return m;
}

Model fit(const SignatureMatrix& enrolled, const ModelConfig& config, bool baseline) {
  if (!baseline) return train(enrolled, config);
  require(enrolled.count() % config.groups == 0, ErrorCategory::kSizing,
          "baseline needs M to divide N");
  return train_random_assignment_baseline(enrolled, config,
                                          static_cast<int>(enrolled.count() / config.groups));
}

int cmd_gen_data(const KeyValueConfig& c, std::ostream& out) {
  const Dataset dataset = generate(synthetic_spec(c));
  const fs::path dir = c.get("data.dir");
  save_dataset(dir, dataset);
  out << "wrote " << dir.string() << ": enrolled=" << dataset.enrolled.count()
      << " genuine=" << dataset.genuine.count() << " impostors=" << dataset.impostors.count()
      << " d=" << dataset.enrolled.dim() << '\n';
  return 0;
}

std::string training_log(const Model& model) {
  std::ostringstream log;
  log << (model.fixed_assignment ? "random-assignment baseline" : "learned assignment")
      << ": l=" << model.config.code_length << " S=" << model.config.sparsity
      << " M=" << model.config.groups << " lambda=" << format_double(model.config.lambda)
      << " gamma=" << format_double(model.config.gamma) << " seed=" << model.config.seed
      << '\n';
  for (std::size_t i = 0; i < model.objective_trace.size(); ++i) {
    const auto& t = model.objective_trace[i];
    log << "iter " << i + 1 << ": embedding=" << format_double(t.embedding_cost)
        << " within=" << format_double(t.within_trace)
        << " between=" << format_double(t.between_trace)
        << " total=" << format_double(t.total) << '\n';
  }
  log << "final within_trace=" << format_double(model.objective_trace.back().within_trace)
      << '\n';
  return log.str();
}

int cmd_train(const KeyValueConfig& c, std::ostream& out) {
  const Dataset dataset = load_dataset(c.get("data.dir"));
  const ModelConfig config = model_config(c, dataset.enrolled.count());
  const Model model = fit(dataset.enrolled, config, c.get_bool("model.baseline"));
  const fs::path path = c.get("model.out");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_model(path, model);
  const std::string log = training_log(model);
  write_file(fs::path(path.string() + ".log"), log);
  out << log;
  return 0;
}

enum class EvalMode { kVerify, kIdentify, kSecurity };

struct EvalRow {
  std::string m;
  int sparsity = 0;
  double lambda = 0.0;
  double gamma = 0.0;
  int groups = 0;
  std::optional<double> threshold, pfn, p_epsilon, dir, mse_security, mse_privacy, beta;
};

constexpr const char* kEvalHeader =
    "m,S,lambda,gamma,M,target_pfp,threshold,pfn_at_pfp05,p_epsilon,dir,mse_security,"
    "mse_privacy,beta\n";

std::string format_row(const EvalRow& row, double target) {
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  std::ostringstream s;
  s << row.m << ',' << row.sparsity << ',' << format_double(row.lambda) << ','
    << format_double(row.gamma) << ',' << row.groups << ',' << format_double(target) << ','
    << cell(row.threshold) << ',' << cell(row.pfn) << ',' << cell(row.p_epsilon) << ','
    << cell(row.dir) << ',' << cell(row.mse_security) << ',' << cell(row.mse_privacy) << ','
    << cell(row.beta) << '\n';
  return s.str();
}

std::string roc_csv(const RocCurve& roc) {
  std::ostringstream s;
  s << "threshold,pfp,pfn\n";
  for (const auto& p : roc.points)
    s << format_double(p.threshold) << ',' << format_double(p.pfp) << ','
      << format_double(p.pfn) << '\n';
  return s.str();
}

EvalRow evaluate(EvalMode mode, const Model& model, const Dataset& dataset,
                 const KeyValueConfig& c, const fs::path& roc_path) {
  const double target = c.get_double("eval.target_pfp");
  const QuerySet queries = make_query_set(dataset, model);
  EvalRow row;
  row.m = format_double(static_cast<double>(model.assignment.count()) /
                        static_cast<double>(model.assignment.groups()));
  row.sparsity = model.config.sparsity;
  row.lambda = model.config.lambda;
  row.gamma = model.config.gamma;
  row.groups = model.assignment.groups();
  switch (mode) {
    case EvalMode::kVerify: {
      const RocCurve roc = verification_sweep(model, queries, c.get_u64("eval.seed"));
      const RocPoint point = operating_point(roc, target);
      row.threshold = point.threshold;
      row.pfn = point.pfn;
      write_file(roc_path, roc_csv(roc));
      break;
    }
    case EvalMode::kIdentify: {
      const auto report = identification_report_at_pfp(model, queries, target);
      row.threshold = report.threshold;
      row.pfn = report.pfn;
      row.p_epsilon = report.p_epsilon;
      row.dir = report.dir;
      break;
    }
    case EvalMode::kSecurity: {
      const auto report = security_report(dataset.enrolled, queries, model);
      row.mse_security = report.mse_security;
      row.mse_privacy = report.mse_privacy;
      row.beta = report.beta;
      break;
    }
  }
  return row;
}

struct SweepPoint {
  int group_size = 0;  // 0: keep model.groups
  int sparsity = 0;
  double lambda = 0.0;
  double gamma = 0.0;
};

int cmd_eval(EvalMode mode, const KeyValueConfig& c, std::ostream& out) {
  const char* name = mode == EvalMode::kVerify     ? "verify"
                     : mode == EvalMode::kIdentify ? "identify"
                                                   : "security";
  const Dataset dataset = load_dataset(c.get("data.dir"));
  const fs::path dir = c.get("eval.out");
  fs::create_directories(dir);
  const double target = c.get_double("eval.target_pfp");

  if (!c.get("eval.model").empty()) {
    const Model model = load_model(c.get("eval.model"));
    const EvalRow row =
        evaluate(mode, model, dataset, c, dir / (std::string(name) + "_roc.csv"));
    const std::string text = std::string(kEvalHeader) + format_row(row, target);
    write_file(dir / (std::string(name) + ".csv"), text);
    out << text;
    return 0;
  }

  const ModelConfig base = model_config(c, dataset.enrolled.count());
  auto ms = c.get_int_list("eval.sweep_m");
  auto ss = c.get_int_list("eval.sweep_s");
  auto lambdas = c.get_double_list("eval.sweep_lambda");
  auto gammas = c.get_double_list("eval.sweep_gamma");
  if (ms.empty()) ms.push_back(0);
  if (ss.empty()) ss.push_back(base.sparsity);
  if (lambdas.empty()) lambdas.push_back(base.lambda);
  if (gammas.empty()) gammas.push_back(base.gamma);

  std::vector<SweepPoint> points;
  for (const int m : ms)
    for (const int s : ss)
      for (const double l : lambdas)
        for (const double g : gammas) points.push_back({m, s, l, g});

  const bool baseline = c.get_bool("model.baseline");
  const Index n = dataset.enrolled.count();
  std::vector<std::string> rows(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  const auto count = static_cast<long>(points.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < count; ++k) {
    try {
      const SweepPoint& p = points[static_cast<std::size_t>(k)];
      ModelConfig config = base;
      config.sparsity = p.sparsity;
      config.lambda = p.lambda;
      config.gamma = p.gamma;
      if (p.group_size > 0) {
        require(n % p.group_size == 0, ErrorCategory::kSizing,
                "sweep m=" + std::to_string(p.group_size) + " does not divide N=" +
                    std::to_string(n));
        config.groups = static_cast<int>(n / p.group_size);
      }
      const Model model = fit(dataset.enrolled, config, baseline);
      const std::string tag = std::string(name) + "_m" +
                              format_double(static_cast<double>(n) / config.groups) + "_S" +
                              std::to_string(config.sparsity) + "_l" +
                              format_double(config.lambda) + "_g" + format_double(config.gamma);
      const EvalRow row = evaluate(mode, model, dataset, c, dir / (tag + "_roc.csv"));
      rows[static_cast<std::size_t>(k)] = format_row(row, target);
      write_file(dir / (tag + ".csv"), std::string(kEvalHeader) + rows[static_cast<std::size_t>(k)]);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::string text = kEvalHeader;
  for (const auto& r : rows) text += r;
  write_file(dir / (std::string(name) + ".csv"), text);
  out << text;
  return 0;
}

int cmd_protocol_demo(const KeyValueConfig& c, std::ostream& out) {
  const Model model = load_model(c.get("protocol.model"));
  const std::string source = c.get("protocol.source");
  const int index = c.get_int("protocol.query_index");

  std::optional<TernaryCode> query;
  if (source == "code") {
    require(index >= 0 && index < model.codes.count(), ErrorCategory::kUsage,
            "query_index out of range");
    query = model.codes.column(index);
  } else {
    const Dataset dataset = load_dataset(c.get("data.dir"));
    const SignatureMatrix* pool = source == "enrolled"  ? &dataset.enrolled
                                  : source == "genuine" ? &dataset.genuine
                                  : source == "impostor" ? &dataset.impostors
                                                         : nullptr;
    require(pool != nullptr, ErrorCategory::kUsage,
            "protocol.source must be code, enrolled, genuine or impostor");
    require(index >= 0 && index < pool->count(), ErrorCategory::kUsage,
            "query_index out of range");
    query = embed(model.projection, pool->column(index), model.config.sparsity);
  }

  protocol::SecurityParams params;
  params.additive_bits = static_cast<unsigned>(c.get_int("protocol.additive_bits"));
  params.multiplicative_bits = static_cast<unsigned>(c.get_int("protocol.multiplicative_bits"));
  params.mask_a_max = c.get_int64("protocol.mask_a_max");
  params.mask_b_max = c.get_int64("protocol.mask_b_max");
  const std::int64_t tau = c.get_int64("protocol.tau");

  const auto run = protocol::run_protocol(*query, model.representations, tau, params,
                                          c.get_u64("protocol.seed"));
  const fs::path path = c.get("protocol.out");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  run.transcript.save(path);

  const bool plain = protocol::plaintext_decision(*query, model.representations, tau);
  out << "decision=" << (run.decision.accept ? "accept" : "reject")
      << " plaintext=" << (plain ? "accept" : "reject") << " tau=" << tau
      << " messages=" << run.transcript.messages.size()
      << " bytes=" << run.transcript.to_bytes().size() << " transcript=" << path.string()
      << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    require(!args.empty(), ErrorCategory::kUsage, "missing command");
    const std::string& command = args.front();
    if (command == "--help" || command == "-h" || command == "help") {
      out << kUsage;
      return 0;
    }
    const KeyValueConfig config =
        load_settings(std::vector<std::string>(args.begin() + 1, args.end()));
    if (command == "gen-data") return cmd_gen_data(config, out);
    if (command == "train") return cmd_train(config, out);
    if (command == "eval-verify") return cmd_eval(EvalMode::kVerify, config, out);
    if (command == "eval-identify") return cmd_eval(EvalMode::kIdentify, config, out);
    if (command == "eval-security") return cmd_eval(EvalMode::kSecurity, config, out);
    if (command == "protocol-demo") return cmd_protocol_demo(config, out);
    fail(ErrorCategory::kUsage, "unknown command '" + command + "'");
  } catch (const Error& e) {
    err << "ERROR:" << category_name(e.category()) << ": " << e.what() << '\n';
    if (e.category() == ErrorCategory::kUsage) err << kUsage;
    return e.category() == ErrorCategory::kUsage ? 2 : 1;
  } catch (const std::exception& e) {
    err << "ERROR:internal: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace gmk::cli
