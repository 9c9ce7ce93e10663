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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "privsel/beta.h"
#include "privsel/experiment.h"
#include "privsel/hard_instance.h"
#include "privsel/mechanisms.h"
#include "privsel/random.h"
#include "privsel/stats.h"
#include "privsel/verify.h"

namespace privsel {
namespace {

constexpr uint64_t kSeed = 20260101;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string Fmt(double v) { return absl::StrFormat("%.6g", v); }

Outcome FromCheck(const CheckResult& r, double max_seconds) {
  const bool fast = r.seconds < max_seconds;
  return {r.passed && fast,
          absl::StrCat(r.name, " value=", Fmt(r.value), " limit=", Fmt(r.limit),
                       " time=", Fmt(r.seconds), "s (max ", max_seconds, "s) ",
                       r.detail)};
}

Outcome Failed(const absl::Status& s) { return {false, s.ToString()}; }

ExperimentConfig AccuracySettings(std::string mechanism) {
  ExperimentConfig c;
  c.kind = ExperimentKind::kTopK;
  c.d = 1024;
  c.k = 8;
  c.n = 2200;
  c.mechanism = std::move(mechanism);
  c.epsilon = 1.0;
  c.delta = 1e-6;
  c.trials = kDefaultAggregateTrials;
  c.master_seed = kSeed;
  c.reference = AccuracyReference::kEmpirical;
  return c;
}

// Peeling at the accuracy settings is shared by criteria 6 and 7.
absl::StatusOr<ExperimentResult>& PeelingAtAccuracySettings() {
  static absl::StatusOr<ExperimentResult> result =
      RunExperiment(AccuracySettings("peeling"));
  return result;
}

Outcome Criterion1() {
  return FromCheck(CheckFingerprintingIdentity(kSeed), 10.0);
}

Outcome Criterion2() {
  return FromCheck(CheckBetaFingerprinting(kSeed), 30.0);
}

Outcome Criterion3() { return FromCheck(CheckTailBoundGrid(), 5.0); }

Outcome Criterion4() {
  const auto start = std::chrono::steady_clock::now();
  absl::StatusOr<double> beta = AnticoncentrationBetaChoice(1024, 8);
  if (!beta.ok()) return Failed(beta.status());
  Rng rng = MakeStream(kSeed, 4);
  absl::StatusOr<MonteCarloEstimate> e = ExpectedTopKSum(
      BetaParams::Symmetric(*beta), 1024, 8, kDefaultAggregateTrials, rng);
  if (!e.ok()) return Failed(e.status());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  const bool beta_ok = std::abs(*beta - 1.7599) < 1e-4;
  return {beta_ok && e->estimate >= 6.0 - e->ci_halfwidth && seconds < 60.0,
          absl::StrCat("beta=", Fmt(*beta), " E[top-8 sum]=", Fmt(e->estimate),
                       " +- ", Fmt(e->ci_halfwidth), " (need >= 6 - CI) time=",
                       Fmt(seconds), "s")};
}

Outcome Criterion5() { return FromCheck(CheckExpMechPrivacyRatio(), 60.0); }

Outcome Criterion6() {
  // n >= sqrt(8 k log(e^eps / delta)) log(d) / (alpha eps).
  const double required =
      std::sqrt(8.0 * 8.0 * std::log(std::exp(1.0) / 1e-6)) * std::log(1024.0) /
      0.1;
  const auto& r = PeelingAtAccuracySettings();
  if (!r.ok()) return Failed(r.status());
  const MeanEstimate& err = r->aggregate.err;
  const bool ok = 2200.0 >= required && err.mean <= 0.1 * 8 + err.ci_halfwidth &&
                  r->aggregate.runtime_s < 600.0;
  return {ok, absl::StrCat("required n=", Fmt(required),
                           " empirical error=", Fmt(err.mean), " +- ",
                           Fmt(err.ci_halfwidth), " (limit 0.8 + CI) time=",
                           Fmt(r->aggregate.runtime_s), "s")};
}

Outcome Criterion7() {
  Outcome out{true, ""};
  for (const char* mech : {"peeling", "rnm", "svt"}) {
    absl::StatusOr<ExperimentResult> owned;
    const absl::StatusOr<ExperimentResult>* r = &PeelingAtAccuracySettings();
    if (std::string(mech) != "peeling") {
      owned = RunExperiment(AccuracySettings(mech));
      r = &owned;
    }
    if (!r->ok()) return Failed(r->status());
    const ResultRecord& a = (*r)->aggregate;
    const bool ok = a.z.mean <= a.z_upper + a.z.ci_halfwidth;
    out.passed = out.passed && ok;
    absl::StrAppend(&out.detail, mech, ": z=", Fmt(a.z.mean), " +- ",
                    Fmt(a.z.ci_halfwidth), " bound=", Fmt(a.z_upper),
                    ok ? "; " : " VIOLATED; ");
  }
  return out;
}

Outcome Criterion8() {
  PerColumnOptions options;
  options.mechanism = MechanismKind::kReportNoisyMax;
  options.d = 64;
  options.k = 4;
  options.n = 200;
  options.beta_sym = 2.0;
  options.trials = kDefaultEqualityTrials;
  options.master_seed = kSeed;
  return FromCheck(CheckPerColumnEquality(options, 2), 600.0);
}

Outcome Criterion9() {
  ExperimentConfig c;
  c.kind = ExperimentKind::kTrace;
  c.d = 1024;
  c.k = 8;
  c.n = 25;
  c.trials = kDefaultAggregateTrials;
  c.master_seed = kSeed;
  c.mechanism = "nonprivate";
  absl::StatusOr<ExperimentResult> open = RunExperiment(c);
  if (!open.ok()) return Failed(open.status());
  c.mechanism = "first-k";
  absl::StatusOr<ExperimentResult> blind = RunExperiment(c);
  if (!blind.ok()) return Failed(blind.status());
  const auto& o = open->aggregate.extras;
  const auto& b = blind->aggregate.extras;
  const bool separated = o.at("gap_mean") - o.at("gap_ci") > 0.0;
  const bool null_gap = std::abs(b.at("gap_mean")) <= b.at("gap_ci");
  return {separated && null_gap,
          absl::StrCat("nonprivate gap=", Fmt(o.at("gap_mean")), " +- ",
                       Fmt(o.at("gap_ci")), "; first-k gap=",
                       Fmt(b.at("gap_mean")), " +- ", Fmt(b.at("gap_ci")))};
}

Outcome Criterion10() {
  Rng rng = MakeStream(kSeed, 10);
  std::vector<double> norms;
  for (int t = 0; t < kDefaultAggregateTrials; ++t) {
    absl::StatusOr<Population> pop =
        SamplePopulation(400, BetaParams::Symmetric(1.0), rng);
    if (!pop.ok()) return Failed(pop.status());
    CompensatedSum s;
    for (double p : pop->means) s.Add(p * p);
    norms.push_back(s.Total() / 400.0);
  }
  const MeanEstimate norm = EstimateMean(norms);

  ExperimentConfig c;
  c.kind = ExperimentKind::kMean;
  c.mechanism = "gauss-mean";
  c.d = 400;
  c.n = 2200;
  c.beta_sym = 1.0;
  c.trials = 200;
  c.master_seed = kSeed;
  absl::StatusOr<ExperimentResult> r = RunExperiment(c);
  if (!r.ok()) return Failed(r.status());
  const auto& e = r->aggregate.extras;
  const double sigma_sq = e.at("sigma_sq");
  const bool noise_ok =
      std::abs(e.at("noisy_sq_err_mean") - sigma_sq) <= e.at("noisy_sq_err_ci");
  return {norm.Covers(1.0 / 3.0) && noise_ok,
          absl::StrCat("E|P|^2/d=", Fmt(norm.mean), " +- ",
                       Fmt(norm.ci_halfwidth), " (1/3); per-coordinate error=",
                       Fmt(e.at("noisy_sq_err_mean")), " +- ",
                       Fmt(e.at("noisy_sq_err_ci")), " sigma^2=",
                       Fmt(sigma_sq))};
}

Outcome Criterion11() {
  ExperimentConfig base = AccuracySettings("peeling");
  base.reference = AccuracyReference::kPopulation;
  const std::vector<double> ns = {100, 300, 1000, 2200};
  absl::StatusOr<std::vector<ResultRecord>> rows = Sweep(base, "n", ns);
  if (!rows.ok()) return Failed(rows.status());
  bool monotone = true;
  std::string detail;
  for (size_t i = 0; i < rows->size(); ++i) {
    const MeanEstimate& e = (*rows)[i].err;
    absl::StrAppend(&detail, "n=", ns[i], ": ", Fmt(e.mean), " +- ",
                    Fmt(e.ci_halfwidth), "; ");
    if (i > 0 && e.lower() > (*rows)[i - 1].err.upper()) monotone = false;
  }
  const bool small_n_fails = (*rows)[0].err.lower() > 0.1 * 8;
  return {monotone && small_n_fails, detail};
}

}  // namespace
}  // namespace privsel

int main() {
  using privsel::Outcome;
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "fingerprinting identity, exact", privsel::Criterion1},
      {2, "beta fingerprinting identity, exact", privsel::Criterion2},
      {3, "symmetric beta tail bound grid", privsel::Criterion3},
      {4, "anti-concentration of the top-8 sum", privsel::Criterion4},
      {5, "exponential mechanism privacy ratio", privsel::Criterion5},
      {6, "peeling accuracy at n = 2200", privsel::Criterion6},
      {7, "E[Z] below the privacy upper bound", privsel::Criterion7},
      {8, "per-column fingerprinting equality", privsel::Criterion8},
      {9, "tracing gap", privsel::Criterion9},
      {10, "uniform prior norm and Gaussian noise accounting",
       privsel::Criterion10},
      {11, "error frontier in n", privsel::Criterion11},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    const Outcome o = c.run();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("%s criterion %d (%s) [%.1fs]: %s\n", o.passed ? "PASS" : "FAIL",
                c.id, c.title, seconds, o.detail.c_str());
    std::fflush(stdout);
    if (!o.passed) ++failures;
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(std::size(criteria)) - failures,
              std::size(criteria));
  return failures == 0 ? 0 : 1;
}
