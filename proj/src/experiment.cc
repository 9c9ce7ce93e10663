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

#include "privsel/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "privsel/beta.h"
#include "privsel/fingerprint.h"
#include "privsel/parallel.h"

namespace privsel {
namespace {

using json = nlohmann::json;

constexpr double kSignalTolerance = 1.0 / 16.0;

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Non-finite values travel as strings so that they survive a JSON round trip.
json NumberToJson(double v) {
  if (std::isfinite(v)) return v;
  return FormatDouble(v);
}

absl::StatusOr<double> NumberFromJson(const json& j, std::string_view field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  return absl::InvalidArgumentError(
      absl::StrCat("Field '", std::string(field), "' must be a number"));
}

json MeanToJson(const MeanEstimate& m) {
  return json{{"mean", NumberToJson(m.mean)},
              {"std_error", NumberToJson(m.std_error)},
              {"ci", NumberToJson(m.ci_halfwidth)},
              {"count", m.count}};
}

absl::StatusOr<MeanEstimate> MeanFromJson(const json& j,
                                          std::string_view field) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat("Field '", std::string(field), "' must be an object"));
  }
  MeanEstimate m;
  for (auto [key, target] :
       {std::pair<const char*, double*>{"mean", &m.mean},
        {"std_error", &m.std_error},
        {"ci", &m.ci_halfwidth}}) {
    if (!j.contains(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat("Field '", std::string(field), ".", key, "' is missing"));
    }
    absl::StatusOr<double> v = NumberFromJson(j.at(key), key);
    if (!v.ok()) return v.status();
    *target = *v;
  }
  m.count = j.value("count", size_t{0});
  return m;
}

// Everything measured in one trial.
struct TrialOutcome {
  TrialRow row;
  double member_score = 0.0;
  double nonmember_score = 0.0;
  double false_positives = 0.0;
  double null_columns = 0.0;
  double true_positives = 0.0;
  double signal_columns = 0.0;
  double noisy_sq_err_per_coord = 0.0;
  double pop_norm_sq_per_coord = 0.0;
};

double GeneralSelectionError(std::span<const double> scores,
                             std::span<const double> reference, size_t k) {
  std::vector<double> sorted(reference.begin(), reference.end());
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end(),
                   std::greater<>());
  CompensatedSum best;
  for (size_t i = 0; i < k; ++i) best.Add(sorted[i]);
  CompensatedSum chosen;
  for (size_t j = 0; j < scores.size(); ++j) {
    chosen.Add(scores[j] * reference[j]);
  }
  return best.Total() - chosen.Total();
}

absl::StatusOr<TrialOutcome> RunTrial(const ExperimentConfig& config,
                                      const MechanismParams& params,
                                      double beta_sym, int64_t t) {
  Rng rng = MakeStream(config.master_seed, static_cast<uint64_t>(t));
  const size_t d = static_cast<size_t>(config.d);
  const size_t n = static_cast<size_t>(config.n);
  const size_t k = static_cast<size_t>(config.k);

  absl::StatusOr<Population> pop =
      SamplePopulation(d, BetaParams::Symmetric(beta_sym), rng);
  if (!pop.ok()) return pop.status();
  absl::StatusOr<Dataset> x = SampleDataset(*pop, n, rng);
  if (!x.ok()) return x.status();
  const ColumnMeans means = ComputeColumnMeans(*x);

  TrialOutcome outcome;
  outcome.row.trial = t;
  SelectionOutput output;
  if (params.kind == MechanismKind::kGaussianMean) {
    absl::StatusOr<MeanRelease> release =
        GaussianMeanRelease(*x, params.epsilon, params.delta, rng);
    if (!release.ok()) return release.status();
    CompensatedSum noisy_err;
    for (size_t j = 0; j < d; ++j) {
      const double e = release->noisy[j] - means.values[j];
      noisy_err.Add(e * e);
    }
    outcome.noisy_sq_err_per_coord = noisy_err.Total() / static_cast<double>(d);
    output = SelectionOutput::FromScores(std::move(release->released));
  } else {
    absl::StatusOr<SelectionOutput> out =
        RunMechanism(params, means.values, n, rng);
    if (!out.ok()) return out.status();
    output = *std::move(out);
  }

  if (IsTopKMechanism(params.kind) &&
      (!output.is_indicator || output.l1_norm != static_cast<double>(k) ||
       output.l2_norm_sq != output.l1_norm)) {
    return absl::InternalError(absl::StrCat(
        "Trial ", t, ": mechanism ", std::string(MechanismName(params.kind)),
        " produced a non-indicator or an output with l1 norm ",
        output.l1_norm, " != k = ", k));
  }

  const std::vector<double>& reference =
      config.reference == AccuracyReference::kPopulation ? pop->means
                                                         : means.values;
  switch (config.kind) {
    case ExperimentKind::kMht: {
      double mistakes = 0.0;
      for (size_t j = 0; j < d; ++j) {
        const bool reported = output.scores[j] == 1.0;
        if (pop->means[j] <= params.svt.tau_prime) {
          outcome.null_columns += 1.0;
          if (reported) outcome.false_positives += 1.0;
          if (reported) mistakes += 1.0;
        } else if (pop->means[j] >= params.svt.tau) {
          outcome.signal_columns += 1.0;
          if (reported) outcome.true_positives += 1.0;
          if (!reported) mistakes += 1.0;
        }
      }
      outcome.row.err = mistakes;
      break;
    }
    case ExperimentKind::kMean: {
      CompensatedSum err;
      CompensatedSum norm;
      for (size_t j = 0; j < d; ++j) {
        const double e = output.scores[j] - reference[j];
        err.Add(e * e);
        norm.Add(pop->means[j] * pop->means[j]);
      }
      outcome.row.err = err.Total() / static_cast<double>(d);
      outcome.pop_norm_sq_per_coord = norm.Total() / static_cast<double>(d);
      break;
    }
    default: {
      if (IsTopKMechanism(params.kind)) {
        absl::StatusOr<double> err =
            SelectionErrorFromIndicator(output.scores, reference, k);
        if (!err.ok()) return err.status();
        outcome.row.err = *err;
      } else {
        outcome.row.err = GeneralSelectionError(output.scores, reference, k);
      }
      break;
    }
  }

  absl::StatusOr<AttackReport> z = ZStatisticByColumn(output, *x, *pop);
  if (!z.ok()) return z.status();
  outcome.row.z_total = z->z_total;
  outcome.row.l2_norm_sq = output.l2_norm_sq;
  absl::StatusOr<double> lb = AccuracyLowerBoundProxy(output, *pop, beta_sym);
  if (!lb.ok()) return lb.status();
  outcome.row.lb_proxy = *lb;
  outcome.row.advantage = *lb / (2.0 * beta_sym);

  if (config.kind == ExperimentKind::kTrace) {
    const size_t i = static_cast<size_t>(rng() % n);
    const std::vector<uint8_t> member = x->Row(i);
    const std::vector<uint8_t> fresh = SampleRow(*pop, rng);
    absl::StatusOr<double> in = TracingScore(output, member, pop->means);
    absl::StatusOr<double> out = TracingScore(output, fresh, pop->means);
    if (!in.ok()) return in.status();
    if (!out.ok()) return out.status();
    outcome.member_score = *in;
    outcome.nonmember_score = *out;
  }
  return outcome;
}

template <typename Field>
std::vector<double> Column(const std::vector<TrialOutcome>& outcomes,
                           Field field) {
  std::vector<double> out;
  out.reserve(outcomes.size());
  for (const TrialOutcome& o : outcomes) out.push_back(field(o));
  return out;
}

}  // namespace

std::string_view ExperimentKindName(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kVerify:
      return "verify";
    case ExperimentKind::kTopK:
      return "topk";
    case ExperimentKind::kMht:
      return "mht";
    case ExperimentKind::kMean:
      return "mean";
    case ExperimentKind::kTrace:
      return "trace";
    case ExperimentKind::kSweep:
      return "sweep";
  }
  return "unknown";
}

absl::StatusOr<ExperimentKind> ParseExperimentKind(std::string_view name) {
  for (ExperimentKind kind :
       {ExperimentKind::kVerify, ExperimentKind::kTopK, ExperimentKind::kMht,
        ExperimentKind::kMean, ExperimentKind::kTrace, ExperimentKind::kSweep}) {
    if (ExperimentKindName(kind) == name) return kind;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "kind: unknown experiment '", std::string(name),
      "'; expected verify, topk, mht, mean, trace or sweep"));
}

absl::Status ValidateConfig(const ExperimentConfig& config) {
  auto bad = [](std::string_view field, auto... parts) {
    return absl::InvalidArgumentError(
        absl::StrCat(std::string(field), ": ", parts...));
  };
  if (config.d < 1) return bad("d", "must be >= 1, got ", config.d);
  if (config.k < 1) return bad("k", "must be >= 1, got ", config.k);
  if (config.n < 1) return bad("n", "must be >= 1, got ", config.n);
  if (config.k > config.d) {
    return bad("k", "must not exceed d = ", config.d, ", got ", config.k);
  }
  if (config.trials < 1) {
    return bad("trials", "must be >= 1, got ", config.trials);
  }
  if (!(config.epsilon > 0.0)) {
    return bad("epsilon", "must be positive, got ", config.epsilon);
  }
  if (config.delta && !(*config.delta >= 0.0 && *config.delta < 1.0)) {
    return bad("delta", "must lie in [0, 1), got ", *config.delta);
  }
  if (config.beta_sym &&
      !(*config.beta_sym > 0.0 && std::isfinite(*config.beta_sym))) {
    return bad("beta_sym", "must be positive, got ", *config.beta_sym);
  }
  absl::StatusOr<MechanismKind> mech = ParseMechanismName(config.mechanism);
  if (!mech.ok()) return bad("mechanism", mech.status().message());
  if (config.kind == ExperimentKind::kMean &&
      *mech != MechanismKind::kGaussianMean) {
    return bad("mechanism", "mean experiments need 'gauss-mean', got '",
               config.mechanism, "'");
  }
  if (config.kind != ExperimentKind::kMean &&
      config.kind != ExperimentKind::kSweep &&
      *mech == MechanismKind::kGaussianMean) {
    return bad("mechanism", "'gauss-mean' is only valid for mean experiments");
  }
  if (config.k_bound < 0) {
    return bad("k_bound", "must be >= 0, got ", config.k_bound);
  }
  HypothesisTestSpec spec{config.tau, config.tau_prime, config.rho, 1};
  if (absl::Status s = spec.Validate(); !s.ok()) {
    return bad("tau", s.message());
  }
  if (config.kind == ExperimentKind::kSweep) {
    if (config.sweep_base == ExperimentKind::kSweep ||
        config.sweep_base == ExperimentKind::kVerify) {
      return bad("sweep_base", "must be topk, mht, mean or trace");
    }
    if (std::find(std::begin(kSweepAxes), std::end(kSweepAxes),
                  config.sweep_axis) == std::end(kSweepAxes)) {
      return bad("sweep_axis", "unknown axis '", config.sweep_axis,
                 "'; expected n, k, d, epsilon or beta_sym");
    }
    if (config.sweep_values.empty()) {
      return bad("sweep_values", "must list at least one value");
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<double> ResolveBeta(const ExperimentConfig& config) {
  if (config.beta_sym) return *config.beta_sym;
  switch (config.kind) {
    case ExperimentKind::kMean:
      return 1.0;
    case ExperimentKind::kMht: {
      if (config.d < 16 * config.k) {
        return absl::FailedPreconditionError(absl::StrCat(
            "beta_sym: 'auto' for mht needs d >= 16k = ", 16 * config.k,
            ", got d = ", config.d));
      }
      return 1.0 + 0.5 * std::log(static_cast<double>(config.d) /
                                  (16.0 * static_cast<double>(config.k)));
    }
    default: {
      absl::StatusOr<double> beta =
          AnticoncentrationBetaChoice(config.d, config.k);
      if (!beta.ok()) {
        return absl::FailedPreconditionError(
            absl::StrCat("beta_sym: 'auto' unavailable: ",
                         beta.status().message()));
      }
      return *beta;
    }
  }
}

double ResolveDelta(const ExperimentConfig& config) {
  if (config.delta) return *config.delta;
  const double n = static_cast<double>(config.n);
  const double d = static_cast<double>(config.d);
  switch (config.kind) {
    case ExperimentKind::kMht:
      return 1.0 / (8.0 * n * d);
    case ExperimentKind::kMean:
      return 1.0 / (10.0 * n);
    default:
      return 1.0 / (n * d);
  }
}

absl::StatusOr<MechanismParams> ResolveMechanism(
    const ExperimentConfig& config) {
  absl::StatusOr<MechanismKind> kind = ParseMechanismName(config.mechanism);
  if (!kind.ok()) return kind.status();
  MechanismParams params;
  params.kind = *kind;
  params.k = static_cast<size_t>(config.k);
  params.epsilon = config.epsilon;
  params.delta = ResolveDelta(config);
  params.svt = HypothesisTestSpec{
      .tau = config.tau,
      .tau_prime = config.tau_prime,
      .rho = config.rho,
      .k_bound = static_cast<int>(config.k_bound > 0 ? config.k_bound
                                                     : 4 * config.k),
  };
  return params;
}

bool operator==(const ResultRecord& a, const ResultRecord& b) {
  return a.config == b.config && a.beta_resolved == b.beta_resolved &&
         a.delta_resolved == b.delta_resolved && a.err == b.err &&
         a.z == b.z && a.z_upper == b.z_upper && a.lb_proxy == b.lb_proxy &&
         a.gamma_hat == b.gamma_hat && a.runtime_s == b.runtime_s &&
         a.extras == b.extras;
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config) {
  if (absl::Status s = ValidateConfig(config); !s.ok()) return s;
  if (config.kind == ExperimentKind::kVerify ||
      config.kind == ExperimentKind::kSweep) {
    return absl::InvalidArgumentError(
        "kind: RunExperiment handles topk, mht, mean and trace; use the "
        "verification suite or Sweep");
  }
  absl::StatusOr<double> beta = ResolveBeta(config);
  if (!beta.ok()) return beta.status();
  absl::StatusOr<MechanismParams> params = ResolveMechanism(config);
  if (!params.ok()) return params.status();
  if (params->kind == MechanismKind::kPeeling && !(params->delta > 0.0)) {
    return absl::InvalidArgumentError(
        "delta: peeling needs delta > 0 for its composition split");
  }

  const auto start = std::chrono::steady_clock::now();
  std::vector<TrialOutcome> outcomes(static_cast<size_t>(config.trials));
  absl::Status first_error;
  int64_t first_error_trial = std::numeric_limits<int64_t>::max();
  std::mutex error_mu;
  ParallelFor(config.trials, config.threads, [&](int64_t t) {
    absl::StatusOr<TrialOutcome> outcome = RunTrial(config, *params, *beta, t);
    if (!outcome.ok()) {
      std::lock_guard<std::mutex> lock(error_mu);
      // Report the lowest failing trial so errors are thread-count stable.
      if (t < first_error_trial) {
        first_error_trial = t;
        first_error = outcome.status();
      }
      return;
    }
    outcomes[static_cast<size_t>(t)] = *std::move(outcome);
  });
  if (!first_error.ok()) return first_error;
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  ExperimentResult result;
  ResultRecord& rec = result.aggregate;
  rec.config = config;
  rec.beta_resolved = *beta;
  rec.delta_resolved = params->delta;
  rec.runtime_s = runtime;
  rec.err = EstimateMean(Column(outcomes, [](auto& o) { return o.row.err; }));
  rec.z = EstimateMean(Column(outcomes, [](auto& o) { return o.row.z_total; }));
  rec.lb_proxy =
      EstimateMean(Column(outcomes, [](auto& o) { return o.row.lb_proxy; }));
  const MeanEstimate l2 =
      EstimateMean(Column(outcomes, [](auto& o) { return o.row.l2_norm_sq; }));
  const MeanEstimate advantage =
      EstimateMean(Column(outcomes, [](auto& o) { return o.row.advantage; }));
  rec.gamma_hat = l2.mean > 0.0 ? advantage.mean / l2.mean : 0.0;

  const PrivacyGuarantee guarantee = GuaranteeOf(*params);
  const BoundParameters bound{
      .epsilon = guarantee.epsilon,
      .delta = guarantee.delta,
      .half_l1_cap = MaxL1Norm(*params, static_cast<size_t>(config.d)) / 2.0,
      .gamma = rec.gamma_hat,
      .beta_sym = *beta,
  };
  absl::StatusOr<double> upper =
      PrivacyUpperBound(bound, static_cast<size_t>(config.n), l2.mean);
  if (!upper.ok()) return upper.status();
  rec.z_upper = *upper;

  const double root_l2 = std::sqrt(l2.mean);
  rec.extras["l2_mean"] = l2.mean;
  rec.extras["advantage_mean"] = advantage.mean;
  rec.extras["advantage_ci"] = advantage.ci_halfwidth;
  rec.extras["z_upper_holds"] = rec.z.lower() <= rec.z_upper ? 1.0 : 0.0;
  rec.extras["lower_below_z"] =
      rec.lb_proxy.mean <= rec.z.upper() + rec.lb_proxy.ci_halfwidth ? 1.0
                                                                     : 0.0;
  rec.extras["implied_n_proof"] =
      3.0 / std::exp(1.0) * (*beta) * rec.gamma_hat * root_l2;
  rec.extras["implied_n_statement"] = (*beta) * rec.gamma_hat * root_l2;

  switch (config.kind) {
    case ExperimentKind::kMht: {
      double fp = 0, nulls = 0, tp = 0, signals = 0;
      for (const TrialOutcome& o : outcomes) {
        fp += o.false_positives;
        nulls += o.null_columns;
        tp += o.true_positives;
        signals += o.signal_columns;
      }
      const double fp_rate = nulls > 0 ? fp / nulls : 0.0;
      const double tp_rate = signals > 0 ? tp / signals : 1.0;
      const double allowance = config.rho * static_cast<double>(config.k) /
                               static_cast<double>(config.d);
      rec.extras["fp_rate"] = fp_rate;
      rec.extras["tp_rate"] = tp_rate;
      rec.extras["fp_allowance"] = allowance;
      rec.extras["assumption1_holds"] = fp_rate <= allowance ? 1.0 : 0.0;
      rec.extras["assumption2_holds"] =
          tp_rate >= 1.0 - kSignalTolerance ? 1.0 : 0.0;
      break;
    }
    case ExperimentKind::kMean: {
      const double sigma = GaussianMeanStddev(
          static_cast<size_t>(config.d), static_cast<size_t>(config.n),
          params->epsilon, params->delta);
      const MeanEstimate noisy = EstimateMean(
          Column(outcomes, [](auto& o) { return o.noisy_sq_err_per_coord; }));
      const MeanEstimate norm = EstimateMean(
          Column(outcomes, [](auto& o) { return o.pop_norm_sq_per_coord; }));
      rec.extras["sigma_sq"] = sigma * sigma;
      rec.extras["noisy_sq_err_mean"] = noisy.mean;
      rec.extras["noisy_sq_err_ci"] = noisy.ci_halfwidth;
      rec.extras["pop_norm_sq_per_coord_mean"] = norm.mean;
      rec.extras["pop_norm_sq_per_coord_ci"] = norm.ci_halfwidth;
      break;
    }
    case ExperimentKind::kTrace: {
      const MeanEstimate member =
          EstimateMean(Column(outcomes, [](auto& o) { return o.member_score; }));
      const MeanEstimate nonmember = EstimateMean(
          Column(outcomes, [](auto& o) { return o.nonmember_score; }));
      const MeanEstimate gap = EstimateMean(Column(
          outcomes, [](auto& o) { return o.member_score - o.nonmember_score; }));
      rec.extras["member_mean"] = member.mean;
      rec.extras["member_ci"] = member.ci_halfwidth;
      rec.extras["nonmember_mean"] = nonmember.mean;
      rec.extras["nonmember_ci"] = nonmember.ci_halfwidth;
      rec.extras["gap_mean"] = gap.mean;
      rec.extras["gap_ci"] = gap.ci_halfwidth;
      break;
    }
    default:
      break;
  }

  result.trials.reserve(outcomes.size());
  for (const TrialOutcome& o : outcomes) result.trials.push_back(o.row);
  return result;
}

absl::StatusOr<std::vector<ResultRecord>> Sweep(
    const ExperimentConfig& base, std::string_view axis,
    const std::vector<double>& values) {
  if (std::find(std::begin(kSweepAxes), std::end(kSweepAxes), axis) ==
      std::end(kSweepAxes)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "sweep_axis: unknown axis '", std::string(axis),
        "'; expected n, k, d, epsilon or beta_sym"));
  }
  std::vector<ResultRecord> records;
  for (double v : values) {
    ExperimentConfig config = base;
    if (config.kind == ExperimentKind::kSweep) config.kind = base.sweep_base;
    config.sweep_axis.clear();
    config.sweep_values.clear();
    const auto as_int = [&](std::string_view field) -> absl::StatusOr<int64_t> {
      if (v != std::floor(v) || v < 1) {
        return absl::InvalidArgumentError(absl::StrCat(
            "sweep_values: ", std::string(field), " needs positive integers, got ", v));
      }
      return static_cast<int64_t>(v);
    };
    if (axis == "n" || axis == "k" || axis == "d") {
      absl::StatusOr<int64_t> iv = as_int(axis);
      if (!iv.ok()) return iv.status();
      (axis == "n" ? config.n : axis == "k" ? config.k : config.d) = *iv;
    } else if (axis == "epsilon") {
      config.epsilon = v;
    } else {
      config.beta_sym = v;
    }
    absl::StatusOr<ExperimentResult> result = RunExperiment(config);
    if (!result.ok()) return result.status();
    records.push_back(std::move(result->aggregate));
  }
  return records;
}

absl::StatusOr<OutputFormat> ParseOutputFormat(std::string_view name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  return absl::InvalidArgumentError(
      absl::StrCat("format: expected csv or json, got '", std::string(name),
                   "'"));
}

namespace {

std::string BetaField(const ExperimentConfig& c) {
  return c.beta_sym ? FormatDouble(*c.beta_sym) : "auto";
}

std::string DeltaField(const ExperimentConfig& c) {
  return c.delta ? FormatDouble(*c.delta) : "paper";
}

}  // namespace

void WriteCsv(std::ostream& out, const std::vector<ResultRecord>& records,
              const EmitOptions& options) {
  out << "kind,d,k,n,beta_sym,beta_resolved,mechanism,epsilon,delta,"
         "delta_resolved,trials,master_seed,reference,"
         "err_mean,err_ci,z_mean,z_ci,z_upper,lb_proxy_mean,lb_proxy_ci,"
         "gamma_hat,runtime_s\n";
  for (const ResultRecord& r : records) {
    const ExperimentConfig& c = r.config;
    out << ExperimentKindName(c.kind) << ',' << c.d << ',' << c.k << ','
        << c.n << ',' << BetaField(c) << ',' << FormatDouble(r.beta_resolved)
        << ',' << c.mechanism << ',' << FormatDouble(c.epsilon) << ','
        << DeltaField(c) << ',' << FormatDouble(r.delta_resolved) << ','
        << c.trials << ',' << c.master_seed << ','
        << AccuracyReferenceName(c.reference) << ','
        << FormatDouble(r.err.mean) << ',' << FormatDouble(r.err.ci_halfwidth)
        << ',' << FormatDouble(r.z.mean) << ','
        << FormatDouble(r.z.ci_halfwidth) << ',' << FormatDouble(r.z_upper)
        << ',' << FormatDouble(r.lb_proxy.mean) << ','
        << FormatDouble(r.lb_proxy.ci_halfwidth) << ','
        << FormatDouble(r.gamma_hat) << ','
        << FormatDouble(options.zero_runtime ? 0.0 : r.runtime_s) << '\n';
  }
}

void WriteTrialCsv(std::ostream& out, const std::vector<TrialRow>& rows) {
  std::vector<TrialRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const TrialRow& a, const TrialRow& b) { return a.trial < b.trial; });
  out << "trial,err,z_total,l2_norm_sq,lb_proxy,advantage\n";
  for (const TrialRow& r : sorted) {
    out << r.trial << ',' << FormatDouble(r.err) << ','
        << FormatDouble(r.z_total) << ',' << FormatDouble(r.l2_norm_sq) << ','
        << FormatDouble(r.lb_proxy) << ',' << FormatDouble(r.advantage)
        << '\n';
  }
}

std::string ConfigToJson(const ExperimentConfig& c) {
  json j;
  j["kind"] = ExperimentKindName(c.kind);
  j["d"] = c.d;
  j["k"] = c.k;
  j["n"] = c.n;
  j["beta_sym"] = c.beta_sym ? json(*c.beta_sym) : json("auto");
  j["mechanism"] = c.mechanism;
  j["epsilon"] = c.epsilon;
  j["delta"] = c.delta ? json(*c.delta) : json("paper");
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["reference"] = AccuracyReferenceName(c.reference);
  j["tau"] = c.tau;
  j["tau_prime"] = c.tau_prime;
  j["rho"] = c.rho;
  j["k_bound"] = c.k_bound;
  j["sweep_base"] = ExperimentKindName(c.sweep_base);
  j["sweep_axis"] = c.sweep_axis;
  j["sweep_values"] = c.sweep_values;
  j["threads"] = c.threads;
  return j.dump();
}

namespace {

absl::StatusOr<ExperimentConfig> ConfigFromJson(const json& j) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError("config: expected a JSON object");
  }
  static const std::set<std::string> kKeys = {
      "kind",      "d",          "k",          "n",         "beta_sym",
      "mechanism", "epsilon",    "delta",      "trials",    "master_seed",
      "reference", "tau",        "tau_prime",  "rho",       "k_bound",
      "sweep_base", "sweep_axis", "sweep_values", "threads"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.contains(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat(key, ": unknown config field"));
    }
  }
  ExperimentConfig c;
  try {
    if (j.contains("kind")) {
      absl::StatusOr<ExperimentKind> kind =
          ParseExperimentKind(j.at("kind").get<std::string>());
      if (!kind.ok()) return kind.status();
      c.kind = *kind;
    }
    if (j.contains("d")) c.d = j.at("d").get<int64_t>();
    if (j.contains("k")) c.k = j.at("k").get<int64_t>();
    if (j.contains("n")) c.n = j.at("n").get<int64_t>();
    if (j.contains("beta_sym")) {
      const json& b = j.at("beta_sym");
      if (b.is_string()) {
        if (b.get<std::string>() != "auto") {
          return absl::InvalidArgumentError(
              "beta_sym: expected a number or \"auto\"");
        }
        c.beta_sym.reset();
      } else {
        c.beta_sym = b.get<double>();
      }
    }
    if (j.contains("mechanism")) c.mechanism = j.at("mechanism").get<std::string>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("delta")) {
      const json& dl = j.at("delta");
      if (dl.is_string()) {
        if (dl.get<std::string>() != "paper") {
          return absl::InvalidArgumentError(
              "delta: expected a number or \"paper\"");
        }
        c.delta.reset();
      } else {
        c.delta = dl.get<double>();
      }
    }
    if (j.contains("trials")) c.trials = j.at("trials").get<int64_t>();
    if (j.contains("master_seed")) {
      c.master_seed = j.at("master_seed").get<uint64_t>();
    }
    if (j.contains("reference")) {
      absl::StatusOr<AccuracyReference> ref =
          ParseAccuracyReference(j.at("reference").get<std::string>());
      if (!ref.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat("reference: ", ref.status().message()));
      }
      c.reference = *ref;
    }
    if (j.contains("tau")) c.tau = j.at("tau").get<double>();
    if (j.contains("tau_prime")) c.tau_prime = j.at("tau_prime").get<double>();
    if (j.contains("rho")) c.rho = j.at("rho").get<double>();
    if (j.contains("k_bound")) c.k_bound = j.at("k_bound").get<int64_t>();
    if (j.contains("sweep_base")) {
      absl::StatusOr<ExperimentKind> kind =
          ParseExperimentKind(j.at("sweep_base").get<std::string>());
      if (!kind.ok()) return kind.status();
      c.sweep_base = *kind;
    }
    if (j.contains("sweep_axis")) {
      c.sweep_axis = j.at("sweep_axis").get<std::string>();
    }
    if (j.contains("sweep_values")) {
      c.sweep_values = j.at("sweep_values").get<std::vector<double>>();
    }
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("config: malformed field: ", e.what()));
  }
  return c;
}

}  // namespace

absl::StatusOr<ExperimentConfig> ParseConfigJson(std::string_view text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return absl::InvalidArgumentError("config: not valid JSON");
  }
  return ConfigFromJson(j);
}

void WriteJson(std::ostream& out, const std::vector<ResultRecord>& records,
               const EmitOptions& options) {
  json arr = json::array();
  for (const ResultRecord& r : records) {
    json extras = json::object();
    for (const auto& [key, value] : r.extras) extras[key] = NumberToJson(value);
    arr.push_back(json{
        {"config", json::parse(ConfigToJson(r.config))},
        {"beta_resolved", NumberToJson(r.beta_resolved)},
        {"delta_resolved", NumberToJson(r.delta_resolved)},
        {"err", MeanToJson(r.err)},
        {"z", MeanToJson(r.z)},
        {"z_upper", NumberToJson(r.z_upper)},
        {"lb_proxy", MeanToJson(r.lb_proxy)},
        {"gamma_hat", NumberToJson(r.gamma_hat)},
        {"runtime_s", NumberToJson(options.zero_runtime ? 0.0 : r.runtime_s)},
        {"extras", extras},
    });
  }
  out << arr.dump(2) << '\n';
}

absl::StatusOr<std::vector<ResultRecord>> ParseResultsJson(
    std::string_view text) {
  json arr = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (arr.is_discarded() || !arr.is_array()) {
    return absl::InvalidArgumentError("results: expected a JSON array");
  }
  std::vector<ResultRecord> out;
  for (const json& j : arr) {
    if (!j.is_object() || !j.contains("config")) {
      return absl::InvalidArgumentError("results: record without config");
    }
    ResultRecord r;
    absl::StatusOr<ExperimentConfig> config = ConfigFromJson(j.at("config"));
    if (!config.ok()) return config.status();
    r.config = *config;
    for (auto [key, target] :
         {std::pair<const char*, double*>{"beta_resolved", &r.beta_resolved},
          {"delta_resolved", &r.delta_resolved},
          {"z_upper", &r.z_upper},
          {"gamma_hat", &r.gamma_hat},
          {"runtime_s", &r.runtime_s}}) {
      if (!j.contains(key)) {
        return absl::InvalidArgumentError(
            absl::StrCat("results: missing field '", key, "'"));
      }
      absl::StatusOr<double> v = NumberFromJson(j.at(key), key);
      if (!v.ok()) return v.status();
      *target = *v;
    }
    for (auto [key, target] : {std::pair<const char*, MeanEstimate*>{
                                   "err", &r.err},
                               {"z", &r.z},
                               {"lb_proxy", &r.lb_proxy}}) {
      if (!j.contains(key)) {
        return absl::InvalidArgumentError(
            absl::StrCat("results: missing field '", key, "'"));
      }
      absl::StatusOr<MeanEstimate> m = MeanFromJson(j.at(key), key);
      if (!m.ok()) return m.status();
      *target = *m;
    }
    if (j.contains("extras")) {
      for (const auto& [key, value] : j.at("extras").items()) {
        absl::StatusOr<double> v = NumberFromJson(value, key);
        if (!v.ok()) return v.status();
        r.extras[key] = *v;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

absl::Status Emit(const std::vector<ResultRecord>& records,
                  OutputFormat format, const std::string& path,
                  const EmitOptions& options) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::UnavailableError(
        absl::StrCat("Cannot open '", path, "' for writing: ",
                     std::strerror(errno)));
  }
  if (format == OutputFormat::kCsv) {
    WriteCsv(out, records, options);
  } else {
    WriteJson(out, records, options);
  }
  out.close();
  if (!out) {
    return absl::DataLossError(absl::StrCat("Failed writing '", path, "'"));
  }
  return absl::OkStatus();
}

}  // namespace privsel
