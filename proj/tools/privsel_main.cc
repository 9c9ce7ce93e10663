//
// Copyright 2026 The privsel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// privsel: runs hard-instance selection experiments and the invariant suite.
//
//   privsel verify
//   privsel topk --d 1024 --k 8 --n 2200 --mech peeling --format csv
//   privsel sweep --base topk --axis n --values 100,300,1000,2200

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "privsel/experiment.h"
#include "privsel/verify.h"

namespace {

using privsel::ExperimentConfig;
using privsel::ExperimentKind;

constexpr int kExitInvariant = 1;
constexpr int kExitConfig = 2;

struct Flags {
  std::string config_path;
  int64_t d = 0, k = 0, n = 0, trials = 0, k_bound = 0;
  std::string beta, mech, delta, ref, base, axis;
  double eps = 0.0;
  uint64_t seed = 0;
  std::vector<double> values;
  int threads = 0;
  std::string out;
  std::string format = "csv";
  std::string per_trial;
  bool no_timing = false;
};

int ExitCodeFor(const absl::Status& status) {
  std::cerr << "privsel: " << status << '\n';
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kOutOfRange:
    case absl::StatusCode::kUnavailable:
    case absl::StatusCode::kNotFound:
      return kExitConfig;
    default:
      return kExitInvariant;
  }
}

void AddExperimentFlags(CLI::App* app, Flags& f, bool sweep) {
  app->add_option("--config", f.config_path,
                  "JSON file with ExperimentConfig fields; flags override");
  app->add_option("--d", f.d, "Number of columns");
  app->add_option("--k", f.k, "Selection size");
  app->add_option("--n", f.n, "Number of rows");
  app->add_option("--beta", f.beta, "Prior shape: auto or a positive real");
  app->add_option("--mech", f.mech,
                  "peeling, rnm, svt, gauss-mean, first-k or nonprivate");
  app->add_option("--eps", f.eps, "Privacy parameter epsilon");
  app->add_option("--delta", f.delta, "paper or a real in [0, 1)");
  app->add_option("--trials", f.trials, "Monte Carlo trials");
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--ref", f.ref, "Accuracy reference: population or empirical");
  app->add_option("--k-bound", f.k_bound, "SVT report cap (0 = 4k)");
  app->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
  app->add_option("--out", f.out, "Output path (default stdout)");
  app->add_option("--format", f.format, "csv or json");
  app->add_flag("--no-timing", f.no_timing,
                "Write runtime_s as 0 for byte-identical reruns");
  if (sweep) {
    app->add_option("--base", f.base, "Experiment to sweep: topk, mht, mean, trace");
    app->add_option("--axis", f.axis, "n, k, d, epsilon or beta_sym");
    app->add_option("--values", f.values, "Comma-separated axis values")
        ->delimiter(',');
  } else {
    app->add_option("--per-trial", f.per_trial, "Also write per-trial rows (CSV)");
  }
}

absl::Status ReadFile(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  text = buf.str();
  return absl::OkStatus();
}

absl::StatusOr<ExperimentConfig> BuildConfig(const CLI::App& app,
                                             const Flags& f,
                                             ExperimentKind kind) {
  ExperimentConfig c;
  if (!f.config_path.empty()) {
    std::string text;
    if (absl::Status s = ReadFile(f.config_path, text); !s.ok()) return s;
    absl::StatusOr<ExperimentConfig> parsed = privsel::ParseConfigJson(text);
    if (!parsed.ok()) return parsed.status();
    c = *parsed;
  }
  c.kind = kind;
  if (kind == ExperimentKind::kMean && app.count("--mech") == 0 &&
      f.config_path.empty()) {
    c.mechanism = "gauss-mean";
  }
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--d")) c.d = f.d;
  if (given("--k")) c.k = f.k;
  if (given("--n")) c.n = f.n;
  if (given("--mech")) c.mechanism = f.mech;
  if (given("--eps")) c.epsilon = f.eps;
  if (given("--trials")) c.trials = f.trials;
  if (given("--seed")) c.master_seed = f.seed;
  if (given("--k-bound")) c.k_bound = f.k_bound;
  if (given("--threads")) c.threads = f.threads;
  if (given("--beta")) {
    double b = 0.0;
    if (f.beta == "auto") {
      c.beta_sym.reset();
    } else if (absl::SimpleAtod(f.beta, &b)) {
      c.beta_sym = b;
    } else {
      return absl::InvalidArgumentError("beta_sym: expected auto or a real, got '" +
                                        f.beta + "'");
    }
  }
  if (given("--delta")) {
    double dl = 0.0;
    if (f.delta == "paper") {
      c.delta.reset();
    } else if (absl::SimpleAtod(f.delta, &dl)) {
      c.delta = dl;
    } else {
      return absl::InvalidArgumentError("delta: expected paper or a real, got '" +
                                        f.delta + "'");
    }
  }
  if (given("--ref")) {
    absl::StatusOr<privsel::AccuracyReference> ref =
        privsel::ParseAccuracyReference(f.ref);
    if (!ref.ok()) {
      return absl::InvalidArgumentError("reference: " +
                                        std::string(ref.status().message()));
    }
    c.reference = *ref;
  }
  if (kind == ExperimentKind::kSweep) {
    if (given("--base")) {
      absl::StatusOr<ExperimentKind> base = privsel::ParseExperimentKind(f.base);
      if (!base.ok()) return base.status();
      c.sweep_base = *base;
      if (c.sweep_base == ExperimentKind::kMean && !given("--mech") &&
          f.config_path.empty()) {
        c.mechanism = "gauss-mean";
      }
    }
    if (given("--axis")) c.sweep_axis = f.axis;
    if (given("--values")) c.sweep_values = f.values;
  }
  if (absl::Status s = privsel::ValidateConfig(c); !s.ok()) return s;
  return c;
}

absl::Status WriteRecords(const Flags& f,
                          const std::vector<privsel::ResultRecord>& records) {
  absl::StatusOr<privsel::OutputFormat> format =
      privsel::ParseOutputFormat(f.format);
  if (!format.ok()) return format.status();
  const privsel::EmitOptions options{.zero_runtime = f.no_timing};
  if (!f.out.empty()) return privsel::Emit(records, *format, f.out, options);
  if (*format == privsel::OutputFormat::kCsv) {
    privsel::WriteCsv(std::cout, records, options);
  } else {
    privsel::WriteJson(std::cout, records, options);
  }
  return absl::OkStatus();
}

int RunVerify(const Flags& f) {
  privsel::VerifyOptions options;
  options.master_seed = f.seed == 0 ? 1 : f.seed;
  options.threads = f.threads;
  if (f.trials > 0) options.equality_trials = f.trials;
  const std::vector<privsel::CheckResult> results =
      privsel::RunVerificationSuite(options);
  if (f.out.empty()) {
    privsel::WriteVerificationJson(std::cout, results);
  } else {
    std::ofstream out(f.out, std::ios::binary | std::ios::trunc);
    if (!out) {
      return ExitCodeFor(
          absl::UnavailableError("Cannot open '" + f.out + "' for writing"));
    }
    privsel::WriteVerificationJson(out, results);
  }
  return privsel::AllPassed(results) ? 0 : kExitInvariant;
}

int RunKind(const CLI::App& app, const Flags& f, ExperimentKind kind) {
  absl::StatusOr<ExperimentConfig> config = BuildConfig(app, f, kind);
  if (!config.ok()) return ExitCodeFor(config.status());
  if (kind == ExperimentKind::kSweep) {
    absl::StatusOr<std::vector<privsel::ResultRecord>> records =
        privsel::Sweep(*config, config->sweep_axis, config->sweep_values);
    if (!records.ok()) return ExitCodeFor(records.status());
    if (absl::Status s = WriteRecords(f, *records); !s.ok()) {
      return ExitCodeFor(s);
    }
    return 0;
  }
  absl::StatusOr<privsel::ExperimentResult> result =
      privsel::RunExperiment(*config);
  if (!result.ok()) return ExitCodeFor(result.status());
  if (absl::Status s = WriteRecords(f, {result->aggregate}); !s.ok()) {
    return ExitCodeFor(s);
  }
  if (!f.per_trial.empty()) {
    std::ofstream out(f.per_trial, std::ios::binary | std::ios::trunc);
    if (!out) {
      return ExitCodeFor(absl::UnavailableError("Cannot open '" + f.per_trial +
                                                "' for writing"));
    }
    privsel::WriteTrialCsv(out, result->trials);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private top-k selection: hard instances, mechanisms and "
               "fingerprinting attacks"};
  app.require_subcommand(1);
  Flags flags;

  CLI::App* verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->add_option("--seed", flags.seed, "Master seed");
  verify->add_option("--trials", flags.trials,
                     "Trials for the per-column equality check");
  verify->add_option("--threads", flags.threads, "Worker threads");
  verify->add_option("--out", flags.out, "Output path (default stdout)");

  struct Entry {
    const char* name;
    const char* help;
    ExperimentKind kind;
  };
  const Entry entries[] = {
      {"topk", "Top-k selection error and attack statistics",
       ExperimentKind::kTopK},
      {"mht", "Multiple hypothesis testing with the sparse vector scan",
       ExperimentKind::kMht},
      {"mean", "Gaussian mean release", ExperimentKind::kMean},
      {"trace", "Member versus non-member tracing scores",
       ExperimentKind::kTrace},
      {"sweep", "One aggregate row per value of an axis",
       ExperimentKind::kSweep},
  };
  std::vector<std::pair<CLI::App*, ExperimentKind>> subs;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    AddExperimentFlags(sub, flags, e.kind == ExperimentKind::kSweep);
    subs.emplace_back(sub, e.kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (verify->parsed()) return RunVerify(flags);
  for (const auto& [sub, kind] : subs) {
    if (sub->parsed()) return RunKind(*sub, flags, kind);
  }
  return kExitConfig;
}
