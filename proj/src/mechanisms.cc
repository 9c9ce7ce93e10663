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

#include "privsel/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"

namespace privsel {
namespace {

absl::Status ValidateK(size_t k, size_t d) {
  if (k < 1 || k > d) {
    return absl::InvalidArgumentError(
        absl::StrCat("k must lie in [1, ", d, "], got ", k));
  }
  return absl::OkStatus();
}

absl::Status ValidateEpsilon(double epsilon) {
  if (!(epsilon > 0.0) || std::isnan(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  return absl::OkStatus();
}

absl::Status ValidateExclude(const std::vector<bool>& exclude, size_t d) {
  if (!exclude.empty() && exclude.size() != d) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Exclusion mask has length ", exclude.size(), ", expected ", d));
  }
  if (d == 0 || (!exclude.empty() &&
                 std::all_of(exclude.begin(), exclude.end(),
                             [](bool b) { return b; }))) {
    return absl::FailedPreconditionError(
        "Every column is excluded; nothing left to select");
  }
  return absl::OkStatus();
}

bool Excluded(const std::vector<bool>& exclude, size_t j) {
  return !exclude.empty() && exclude[j];
}

}  // namespace

double PeelingPerRoundEpsilon(double epsilon, double delta, int rounds) {
  // log(e^eps / delta) = eps - log(delta).
  return epsilon /
         std::sqrt(8.0 * rounds * (epsilon - std::log(delta)));
}

absl::StatusOr<PrivacyBudget> PrivacyBudget::ForPeeling(double epsilon,
                                                        double delta,
                                                        int rounds) {
  if (absl::Status s = ValidateEpsilon(epsilon); !s.ok()) return s;
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Peeling needs delta in (0, 1) for its composition split, got ",
        delta, "; use a pure-epsilon mechanism for delta = 0"));
  }
  if (rounds < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("rounds must be >= 1, got ", rounds));
  }
  return PrivacyBudget{
      .epsilon = epsilon,
      .delta = delta,
      .rounds = rounds,
      .per_round_epsilon = PeelingPerRoundEpsilon(epsilon, delta, rounds),
  };
}

absl::StatusOr<PrivacyBudget> PrivacyBudget::PureEpsilon(double epsilon) {
  if (absl::Status s = ValidateEpsilon(epsilon); !s.ok()) return s;
  return PrivacyBudget{epsilon, 0.0, 1, epsilon};
}

SelectionOutput SelectionOutput::FromScores(std::vector<double> scores) {
  SelectionOutput out;
  out.scores = std::move(scores);
  out.is_indicator = true;
  for (double s : out.scores) {
    out.l1_norm += std::abs(s);
    out.l2_norm_sq += s * s;
    if (s != 0.0 && s != 1.0) out.is_indicator = false;
  }
  return out;
}

SelectionOutput SelectionOutput::FromIndices(size_t d,
                                             std::span<const size_t> indices) {
  std::vector<double> scores(d, 0.0);
  for (size_t j : indices) scores[j] = 1.0;
  return FromScores(std::move(scores));
}

std::vector<size_t> SelectionOutput::SelectedIndices() const {
  std::vector<size_t> out;
  for (size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] == 1.0) out.push_back(j);
  }
  return out;
}

absl::Status HypothesisTestSpec::Validate() const {
  if (!(0.0 < tau_prime && tau_prime < tau && tau < 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Thresholds must satisfy 0 < tau' < tau < 1, got tau = ", tau,
        ", tau' = ", tau_prime));
  }
  if (!(0.0 < rho && rho < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("rho must lie in (0, 1), got ", rho));
  }
  if (k_bound < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("k_bound must be >= 1, got ", k_bound));
  }
  return absl::OkStatus();
}

double HypothesisTestSpec::FalsePositiveAllowance(size_t d) const {
  return rho * k_bound / static_cast<double>(d);
}

std::string_view MechanismName(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kPeeling:
      return "peeling";
    case MechanismKind::kReportNoisyMax:
      return "rnm";
    case MechanismKind::kSparseVector:
      return "svt";
    case MechanismKind::kGaussianMean:
      return "gauss-mean";
    case MechanismKind::kFirstK:
      return "first-k";
    case MechanismKind::kNonPrivate:
      return "nonprivate";
  }
  return "unknown";
}

absl::StatusOr<MechanismKind> ParseMechanismName(std::string_view name) {
  for (MechanismKind kind :
       {MechanismKind::kPeeling, MechanismKind::kReportNoisyMax,
        MechanismKind::kSparseVector, MechanismKind::kGaussianMean,
        MechanismKind::kFirstK, MechanismKind::kNonPrivate}) {
    if (MechanismName(kind) == name) return kind;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "Unknown mechanism '", std::string(name),
      "'; expected one of peeling, rnm, svt, gauss-mean, first-k, nonprivate"));
}

bool IsTopKMechanism(MechanismKind kind) {
  return kind == MechanismKind::kPeeling ||
         kind == MechanismKind::kReportNoisyMax ||
         kind == MechanismKind::kFirstK || kind == MechanismKind::kNonPrivate;
}

absl::StatusOr<std::vector<double>> ExpMechProbabilities(
    std::span<const double> means, size_t n, double epsilon,
    const std::vector<bool>& exclude) {
  if (absl::Status s = ValidateExclude(exclude, means.size()); !s.ok()) return s;
  if (!(epsilon >= 0.0)) {
    return absl::InvalidArgumentError("epsilon must be non-negative");
  }
  const double scale = epsilon * static_cast<double>(n) / 2.0;
  double top = -std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < means.size(); ++j) {
    if (!Excluded(exclude, j)) top = std::max(top, scale * means[j]);
  }
  std::vector<double> probs(means.size(), 0.0);
  double total = 0.0;
  for (size_t j = 0; j < means.size(); ++j) {
    if (Excluded(exclude, j)) continue;
    probs[j] = std::exp(scale * means[j] - top);
    total += probs[j];
  }
  for (double& p : probs) p /= total;
  return probs;
}

absl::StatusOr<size_t> ExpMechSelectOne(std::span<const double> means,
                                        size_t n, double epsilon,
                                        const std::vector<bool>& exclude,
                                        Rng& rng) {
  if (absl::Status s = ValidateExclude(exclude, means.size()); !s.ok()) return s;
  if (!(epsilon >= 0.0)) {
    return absl::InvalidArgumentError("epsilon must be non-negative");
  }
  // argmax_j (scale * u_j + G_j) with G_j standard Gumbel is distributed as
  // softmax(scale * u).
  const double scale = epsilon * static_cast<double>(n) / 2.0;
  size_t best = means.size();
  double best_value = -std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < means.size(); ++j) {
    if (Excluded(exclude, j)) continue;
    const double value = scale * means[j] + SampleStandardGumbel(rng);
    if (best == means.size() || value > best_value) {
      best = j;
      best_value = value;
    }
  }
  return best;
}

absl::StatusOr<SelectionOutput> PeelingTopK(std::span<const double> means,
                                            size_t n, size_t k,
                                            const PrivacyBudget& budget,
                                            Rng& rng) {
  if (absl::Status s = ValidateK(k, means.size()); !s.ok()) return s;
  if (!(budget.delta > 0.0)) {
    return absl::InvalidArgumentError(
        "Peeling refuses delta = 0: its composition split needs delta > 0");
  }
  if (budget.rounds != static_cast<int>(k)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Peeling budget is split over ", budget.rounds, " rounds but k = ", k));
  }
  std::vector<bool> exclude(means.size(), false);
  std::vector<size_t> chosen;
  chosen.reserve(k);
  for (size_t round = 0; round < k; ++round) {
    absl::StatusOr<size_t> j =
        ExpMechSelectOne(means, n, budget.per_round_epsilon, exclude, rng);
    if (!j.ok()) return j.status();
    exclude[*j] = true;
    chosen.push_back(*j);
  }
  return SelectionOutput::FromIndices(means.size(), chosen);
}

absl::StatusOr<SelectionOutput> PeelingTopK(const Dataset& x, size_t k,
                                            const PrivacyBudget& budget,
                                            Rng& rng) {
  return PeelingTopK(ComputeColumnMeans(x).values, x.n(), k, budget, rng);
}

absl::StatusOr<SelectionOutput> ReportNoisyMaxTopKWithScale(
    std::span<const double> means, size_t k, double noise_scale, Rng& rng) {
  if (absl::Status s = ValidateK(k, means.size()); !s.ok()) return s;
  if (!(noise_scale >= 0.0)) {
    return absl::InvalidArgumentError("noise scale must be non-negative");
  }
  std::vector<double> noisy(means.begin(), means.end());
  for (double& v : noisy) v += SampleLaplace(noise_scale, rng);
  absl::StatusOr<std::vector<size_t>> top = TopKSet(noisy, k);
  if (!top.ok()) return top.status();
  return SelectionOutput::FromIndices(means.size(), *top);
}

absl::StatusOr<SelectionOutput> ReportNoisyMaxTopK(const Dataset& x, size_t k,
                                                   double epsilon, Rng& rng) {
  if (absl::Status s = ValidateEpsilon(epsilon); !s.ok()) return s;
  const double scale =
      2.0 * static_cast<double>(k) / (epsilon * static_cast<double>(x.n()));
  return ReportNoisyMaxTopKWithScale(ComputeColumnMeans(x).values, k, scale,
                                     rng);
}

SvtNoise SvtNoiseFor(const HypothesisTestSpec& spec, double epsilon,
                     size_t n) {
  const double eps0 = epsilon / (2.0 * spec.k_bound);
  const double nn = static_cast<double>(n);
  return {.threshold_scale = 2.0 / (eps0 * nn),
          .query_scale = 4.0 / (eps0 * nn)};
}

absl::StatusOr<SelectionOutput> SparseVectorSelectWithNoise(
    std::span<const double> means, const HypothesisTestSpec& spec,
    const SvtNoise& noise, Rng& rng) {
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  if (means.empty()) {
    return absl::InvalidArgumentError("SVT needs at least one column");
  }
  std::vector<double> scores(means.size(), 0.0);
  int reports = 0;
  double threshold = spec.midpoint() + SampleLaplace(noise.threshold_scale, rng);
  for (size_t j = 0; j < means.size() && reports < spec.k_bound; ++j) {
    const double query = means[j] + SampleLaplace(noise.query_scale, rng);
    if (query >= threshold) {
      scores[j] = 1.0;
      ++reports;
      threshold = spec.midpoint() + SampleLaplace(noise.threshold_scale, rng);
    }
  }
  return SelectionOutput::FromScores(std::move(scores));
}

absl::StatusOr<SelectionOutput> SparseVectorSelect(
    const Dataset& x, const HypothesisTestSpec& spec,
    const PrivacyBudget& budget, Rng& rng) {
  if (absl::Status s = ValidateEpsilon(budget.epsilon); !s.ok()) return s;
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  return SparseVectorSelectWithNoise(ComputeColumnMeans(x).values, spec,
                                     SvtNoiseFor(spec, budget.epsilon, x.n()),
                                     rng);
}

double GaussianMeanStddev(size_t d, size_t n, double epsilon, double delta) {
  const double l2_sensitivity =
      std::sqrt(static_cast<double>(d)) / static_cast<double>(n);
  return std::sqrt(2.0 * std::log(1.25 / delta)) * l2_sensitivity / epsilon;
}

namespace {

absl::StatusOr<MeanRelease> GaussianMeanReleaseFromMeans(
    std::span<const double> means, size_t n, double epsilon, double delta,
    Rng& rng) {
  if (absl::Status s = ValidateEpsilon(epsilon); !s.ok()) return s;
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Gaussian mean release needs delta in (0, 1), got ", delta));
  }
  MeanRelease out;
  out.noise_stddev = GaussianMeanStddev(means.size(), n, epsilon, delta);
  out.noisy.assign(means.begin(), means.end());
  out.released.resize(means.size());
  for (size_t j = 0; j < means.size(); ++j) {
    out.noisy[j] += SampleGaussian(out.noise_stddev, rng);
    out.released[j] = std::clamp(out.noisy[j], 0.0, 1.0);
  }
  return out;
}

}  // namespace

absl::StatusOr<MeanRelease> GaussianMeanRelease(const Dataset& x,
                                                double epsilon, double delta,
                                                Rng& rng) {
  return GaussianMeanReleaseFromMeans(ComputeColumnMeans(x).values, x.n(),
                                      epsilon, delta, rng);
}

absl::StatusOr<SelectionOutput> TrivialFirstK(size_t d, size_t k) {
  if (absl::Status s = ValidateK(k, d); !s.ok()) return s;
  std::vector<size_t> first(k);
  std::iota(first.begin(), first.end(), size_t{0});
  return SelectionOutput::FromIndices(d, first);
}

absl::StatusOr<SelectionOutput> NonPrivateTopK(const Dataset& x, size_t k) {
  const ColumnMeans means = ComputeColumnMeans(x);
  absl::StatusOr<std::vector<size_t>> top = TopKSet(means.values, k);
  if (!top.ok()) return top.status();
  return SelectionOutput::FromIndices(x.d(), *top);
}

absl::StatusOr<SelectionOutput> RunMechanism(const MechanismParams& params,
                                             std::span<const double> means,
                                             size_t n, Rng& rng) {
  const size_t d = means.size();
  switch (params.kind) {
    case MechanismKind::kPeeling: {
      absl::StatusOr<PrivacyBudget> budget = PrivacyBudget::ForPeeling(
          params.epsilon, params.delta, static_cast<int>(params.k));
      if (!budget.ok()) return budget.status();
      return PeelingTopK(means, n, params.k, *budget, rng);
    }
    case MechanismKind::kReportNoisyMax: {
      if (absl::Status s = ValidateEpsilon(params.epsilon); !s.ok()) return s;
      const double scale = 2.0 * static_cast<double>(params.k) /
                           (params.epsilon * static_cast<double>(n));
      return ReportNoisyMaxTopKWithScale(means, params.k, scale, rng);
    }
    case MechanismKind::kSparseVector: {
      if (absl::Status s = ValidateEpsilon(params.epsilon); !s.ok()) return s;
      return SparseVectorSelectWithNoise(
          means, params.svt, SvtNoiseFor(params.svt, params.epsilon, n), rng);
    }
    case MechanismKind::kGaussianMean: {
      absl::StatusOr<MeanRelease> release = GaussianMeanReleaseFromMeans(
          means, n, params.epsilon, params.delta, rng);
      if (!release.ok()) return release.status();
      return SelectionOutput::FromScores(std::move(release->released));
    }
    case MechanismKind::kFirstK:
      return TrivialFirstK(d, params.k);
    case MechanismKind::kNonPrivate: {
      absl::StatusOr<std::vector<size_t>> top = TopKSet(means, params.k);
      if (!top.ok()) return top.status();
      return SelectionOutput::FromIndices(d, *top);
    }
  }
  return absl::InternalError("Unhandled mechanism kind");
}

absl::StatusOr<SelectionOutput> RunMechanism(const MechanismParams& params,
                                             const Dataset& x, Rng& rng) {
  return RunMechanism(params, ComputeColumnMeans(x).values, x.n(), rng);
}

double MaxL1Norm(const MechanismParams& params, size_t d) {
  switch (params.kind) {
    case MechanismKind::kSparseVector:
      return std::min<double>(params.svt.k_bound, static_cast<double>(d));
    case MechanismKind::kGaussianMean:
      return static_cast<double>(d);
    default:
      return static_cast<double>(params.k);
  }
}

PrivacyGuarantee GuaranteeOf(const MechanismParams& params) {
  switch (params.kind) {
    case MechanismKind::kPeeling:
    case MechanismKind::kGaussianMean:
      return {params.epsilon, params.delta};
    case MechanismKind::kReportNoisyMax:
    case MechanismKind::kSparseVector:
      return {params.epsilon, 0.0};
    case MechanismKind::kFirstK:
      return {0.0, 0.0};
    case MechanismKind::kNonPrivate:
      return {std::numeric_limits<double>::infinity(), 0.0};
  }
  return {std::numeric_limits<double>::infinity(), 0.0};
}

}  // namespace privsel
