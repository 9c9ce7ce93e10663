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

#ifndef PRIVSEL_EXPERIMENT_H_
#define PRIVSEL_EXPERIMENT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "privsel/hard_instance.h"
#include "privsel/mechanisms.h"
#include "privsel/stats.h"

namespace privsel {

enum class ExperimentKind { kVerify, kTopK, kMht, kMean, kTrace, kSweep };

std::string_view ExperimentKindName(ExperimentKind kind);
absl::StatusOr<ExperimentKind> ParseExperimentKind(std::string_view name);

inline constexpr int64_t kDefaultAggregateTrials = 2000;
inline constexpr int64_t kDefaultEqualityTrials = 10000;

// One experiment. JSON config files use exactly these field names; beta_sym
// accepts "auto" and delta accepts "paper".
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kTopK;
  int64_t d = 1024;
  int64_t k = 8;
  int64_t n = 2200;
  // nullopt means "auto".
  std::optional<double> beta_sym;
  std::string mechanism = "peeling";
  double epsilon = 1.0;
  // nullopt means "paper".
  std::optional<double> delta;
  int64_t trials = kDefaultAggregateTrials;
  uint64_t master_seed = 1;
  AccuracyReference reference = AccuracyReference::kPopulation;
  // Hypothesis-testing thresholds and report cap (mht). k_bound 0 means 4k.
  double tau = 7.0 / 8.0;
  double tau_prime = 11.0 / 16.0;
  double rho = 1.0 / 16.0;
  int64_t k_bound = 0;
  // Sweep settings (kind == sweep).
  ExperimentKind sweep_base = ExperimentKind::kTopK;
  std::string sweep_axis;
  std::vector<double> sweep_values;
  // Execution settings; never affect results.
  int threads = 0;

  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

// Field-level validation. Returns InvalidArgument naming the first bad field.
absl::Status ValidateConfig(const ExperimentConfig& config);

// beta_sym after resolving "auto": the top-k anti-concentration choice for
// topk/trace, 1 + log(d/16k)/2 for mht, 1 for mean.
absl::StatusOr<double> ResolveBeta(const ExperimentConfig& config);
// delta after resolving "paper": 1/(nd) for topk/trace, 1/(8nd) for mht,
// 1/(10n) for mean.
double ResolveDelta(const ExperimentConfig& config);
absl::StatusOr<MechanismParams> ResolveMechanism(const ExperimentConfig& config);

// Per-trial measurements, emitted in trial order.
struct TrialRow {
  int64_t trial = 0;
  double err = 0.0;
  double z_total = 0.0;
  double l2_norm_sq = 0.0;
  double lb_proxy = 0.0;
  // sum_j M^j (P^j - 1/2).
  double advantage = 0.0;
};

// Aggregate over all trials of one configuration. Intervals are 3 sigma.
struct ResultRecord {
  ExperimentConfig config;
  double beta_resolved = 0.0;
  double delta_resolved = 0.0;
  MeanEstimate err;
  MeanEstimate z;
  double z_upper = 0.0;
  MeanEstimate lb_proxy;
  double gamma_hat = 0.0;
  double runtime_s = 0.0;
  // Kind-specific figures (l2 mean, tracing means, false-positive rates,
  // implied sample-size bounds, ...).
  std::map<std::string, double> extras;

  friend bool operator==(const ResultRecord& a, const ResultRecord& b);
};

struct ExperimentResult {
  ResultRecord aggregate;
  std::vector<TrialRow> trials;
};

// Runs a topk, mht, mean or trace experiment. Deterministic in
// config.master_seed for any thread count. An indicator-invariant violation
// inside a trial is reported as an Internal error.
absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config);

inline constexpr std::string_view kSweepAxes[] = {"n", "k", "d", "epsilon",
                                                  "beta_sym"};

// One aggregate per value of `axis`, all sharing base.master_seed.
absl::StatusOr<std::vector<ResultRecord>> Sweep(
    const ExperimentConfig& base, std::string_view axis,
    const std::vector<double>& values);

enum class OutputFormat { kCsv, kJson };
absl::StatusOr<OutputFormat> ParseOutputFormat(std::string_view name);

struct EmitOptions {
  // Writes runtime_s as 0 so that repeated runs are byte-identical.
  bool zero_runtime = false;
};

// Fixed CSV columns: config fields, then
// err_mean,err_ci,z_mean,z_ci,z_upper,lb_proxy_mean,lb_proxy_ci,gamma_hat,
// runtime_s. Floats use 17 significant digits.
void WriteCsv(std::ostream& out, const std::vector<ResultRecord>& records,
              const EmitOptions& options = {});
void WriteJson(std::ostream& out, const std::vector<ResultRecord>& records,
               const EmitOptions& options = {});
void WriteTrialCsv(std::ostream& out, const std::vector<TrialRow>& rows);

// Writes to `path`, surfacing I/O failures.
absl::Status Emit(const std::vector<ResultRecord>& records,
                  OutputFormat format, const std::string& path,
                  const EmitOptions& options = {});

absl::StatusOr<std::vector<ResultRecord>> ParseResultsJson(
    std::string_view text);

// Reads an ExperimentConfig from JSON text. Unknown keys are rejected.
absl::StatusOr<ExperimentConfig> ParseConfigJson(std::string_view text);
std::string ConfigToJson(const ExperimentConfig& config);

}  // namespace privsel

#endif  // PRIVSEL_EXPERIMENT_H_
