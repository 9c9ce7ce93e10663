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

#ifndef PRIVSEL_MECHANISMS_H_
#define PRIVSEL_MECHANISMS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "privsel/hard_instance.h"
#include "privsel/random.h"

namespace privsel {

// Overall (epsilon, delta) and its split across `rounds` adaptive rounds.
//
// For peeling the per-round budget is epsilon / sqrt(8 k log(e^epsilon /
// delta)), which is the split under which k rounds of the exponential
// mechanism reach the top-k accuracy guarantee at
//   n >= sqrt(8 k log(e^epsilon / delta)) log(d) / (alpha epsilon).
// Pure-epsilon budgets (delta == 0) charge the whole epsilon to one round.
struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 0.0;
  int rounds = 1;
  double per_round_epsilon = 1.0;

  // Requires epsilon > 0, 0 < delta < 1, rounds >= 1.
  static absl::StatusOr<PrivacyBudget> ForPeeling(double epsilon, double delta,
                                                  int rounds);
  // Requires epsilon > 0.
  static absl::StatusOr<PrivacyBudget> PureEpsilon(double epsilon);
};

// epsilon / sqrt(8 rounds log(e^epsilon / delta)).
double PeelingPerRoundEpsilon(double epsilon, double delta, int rounds);

// A mechanism output M(X) in [-1, 1]^d with cached norms.
struct SelectionOutput {
  std::vector<double> scores;
  double l1_norm = 0.0;
  double l2_norm_sq = 0.0;
  bool is_indicator = false;

  static SelectionOutput FromScores(std::vector<double> scores);
  static SelectionOutput FromIndices(size_t d, std::span<const size_t> indices);

  size_t d() const { return scores.size(); }
  // Indices with score exactly 1, ascending.
  std::vector<size_t> SelectedIndices() const;
};

// Thresholds for the hypothesis-testing variant: columns with mean >= tau
// should be reported, columns with mean <= tau_prime should not. The
// defaults are 7/8 and 7/8 - 3/16 = 11/16.
struct HypothesisTestSpec {
  double tau = 7.0 / 8.0;
  double tau_prime = 11.0 / 16.0;
  // Tolerated false-positive mass: Pr[report | mean <= tau'] <= rho * k / d.
  double rho = 1.0 / 16.0;
  int k_bound = 1;

  absl::Status Validate() const;
  double midpoint() const { return 0.5 * (tau + tau_prime); }
  // rho * k_bound / d, the per-column false-positive allowance.
  double FalsePositiveAllowance(size_t d) const;
};

enum class MechanismKind {
  kPeeling,
  kReportNoisyMax,
  kSparseVector,
  kGaussianMean,
  kFirstK,
  kNonPrivate,
};

// "peeling", "rnm", "svt", "gauss-mean", "first-k", "nonprivate".
std::string_view MechanismName(MechanismKind kind);
absl::StatusOr<MechanismKind> ParseMechanismName(std::string_view name);
// True for mechanisms that always output an indicator with exactly k ones.
bool IsTopKMechanism(MechanismKind kind);

// Exact selection distribution of one exponential-mechanism round:
// Pr[j] proportional to exp(epsilon * n * means[j] / 2) over j not excluded,
// zero on excluded j. `exclude` may be empty (nothing excluded) or have
// length d.
absl::StatusOr<std::vector<double>> ExpMechProbabilities(
    std::span<const double> means, size_t n, double epsilon,
    const std::vector<bool>& exclude);

// One draw from the distribution above, by Gumbel-max.
absl::StatusOr<size_t> ExpMechSelectOne(std::span<const double> means,
                                        size_t n, double epsilon,
                                        const std::vector<bool>& exclude,
                                        Rng& rng);

// k rounds of the exponential mechanism at budget.per_round_epsilon, each
// removing the selected column. Requires budget.rounds == k and delta > 0.
absl::StatusOr<SelectionOutput> PeelingTopK(const Dataset& x, size_t k,
                                            const PrivacyBudget& budget,
                                            Rng& rng);
absl::StatusOr<SelectionOutput> PeelingTopK(std::span<const double> means,
                                            size_t n, size_t k,
                                            const PrivacyBudget& budget,
                                            Rng& rng);

// Laplace(2k / (epsilon n)) noise on every column mean, then the indicator
// of the k noisy-largest.
absl::StatusOr<SelectionOutput> ReportNoisyMaxTopK(const Dataset& x, size_t k,
                                                   double epsilon, Rng& rng);
// As above with an explicit Laplace scale, in mean units.
absl::StatusOr<SelectionOutput> ReportNoisyMaxTopKWithScale(
    std::span<const double> means, size_t k, double noise_scale, Rng& rng);

// Noise scales for the sparse-vector scan, in column-mean units.
struct SvtNoise {
  double threshold_scale;
  double query_scale;
};

// Laplace(2/eps0) on the threshold and Laplace(4/eps0) on each query, with
// eps0 = epsilon / (2 k_bound), divided by n for column-mean units.
SvtNoise SvtNoiseFor(const HypothesisTestSpec& spec, double epsilon,
                     size_t n);

// Single pass over the columns. A column is reported when its noisy mean
// reaches a noisy copy of the midpoint threshold (tau + tau') / 2; the
// threshold is redrawn after every report and scanning reports nothing more
// once k_bound columns have been reported.
absl::StatusOr<SelectionOutput> SparseVectorSelect(
    const Dataset& x, const HypothesisTestSpec& spec,
    const PrivacyBudget& budget, Rng& rng);
absl::StatusOr<SelectionOutput> SparseVectorSelectWithNoise(
    std::span<const double> means, const HypothesisTestSpec& spec,
    const SvtNoise& noise, Rng& rng);

struct MeanRelease {
  // Column means plus Gaussian noise, before clamping.
  std::vector<double> noisy;
  // `noisy` clamped to [0, 1]; this is the mechanism output.
  std::vector<double> released;
  double noise_stddev = 0.0;
};

// sqrt(2 log(1.25 / delta)) * (sqrt(d) / n) / epsilon.
double GaussianMeanStddev(size_t d, size_t n, double epsilon, double delta);

// Requires epsilon > 0 and 0 < delta < 1.
absl::StatusOr<MeanRelease> GaussianMeanRelease(const Dataset& x,
                                                double epsilon, double delta,
                                                Rng& rng);

// Data-independent baseline: the first k columns.
absl::StatusOr<SelectionOutput> TrivialFirstK(size_t d, size_t k);
// Exact empirical top-k.
absl::StatusOr<SelectionOutput> NonPrivateTopK(const Dataset& x, size_t k);

// Everything a mechanism run may need, so that callers can dispatch by name.
struct MechanismParams {
  MechanismKind kind = MechanismKind::kPeeling;
  size_t k = 1;
  double epsilon = 1.0;
  double delta = 0.0;
  HypothesisTestSpec svt;
};

// Runs the named mechanism on precomputed column means. For kGaussianMean the
// output scores are the released means, which is not an indicator.
absl::StatusOr<SelectionOutput> RunMechanism(const MechanismParams& params,
                                             std::span<const double> means,
                                             size_t n, Rng& rng);
absl::StatusOr<SelectionOutput> RunMechanism(const MechanismParams& params,
                                             const Dataset& x, Rng& rng);

// Largest l1 norm the mechanism can output, i.e. 2 Delta in the privacy
// upper bound on E[Z].
double MaxL1Norm(const MechanismParams& params, size_t d);

// The (epsilon, delta) the mechanism actually satisfies.
struct PrivacyGuarantee {
  double epsilon;
  double delta;
};
PrivacyGuarantee GuaranteeOf(const MechanismParams& params);

}  // namespace privsel

#endif  // PRIVSEL_MECHANISMS_H_
