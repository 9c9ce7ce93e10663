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

#ifndef PRIVSEL_BETA_H_
#define PRIVSEL_BETA_H_

#include <cstdint>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "privsel/random.h"

namespace privsel {

// Shape parameters of Beta(alpha, beta). Both must be positive; the
// symmetric prior Beta(b, b) of the hard instance is the common case.
struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;

  static BetaParams Symmetric(double b) { return {b, b}; }
  bool is_symmetric() const { return alpha == beta; }

  friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

absl::Status ValidateBetaParams(const BetaParams& params);

// B(a, b) = integral_0^1 p^(a-1) (1-p)^(b-1) dp.
absl::StatusOr<double> BetaFunction(double a, double b);

// Density at p in [0, 1]. May be +inf at an endpoint when a shape is below 1.
absl::StatusOr<double> BetaPdf(const BetaParams& params, double p);

// Pr[P <= p] for p in [0, 1].
absl::StatusOr<double> BetaCdf(const BetaParams& params, double p);

struct BetaMoments {
  double mean;
  double variance;
};

// alpha/(alpha+beta) and alpha*beta/((alpha+beta)^2 (alpha+beta+1)).
absl::StatusOr<BetaMoments> ComputeBetaMoments(const BetaParams& params);

// One draw, as G1 / (G1 + G2) with G1 ~ Gamma(alpha), G2 ~ Gamma(beta).
// `params` must already be valid.
double SampleBeta(const BetaParams& params, Rng& rng);

// Tolerance used when checking the tail bound against the exact probability.
inline constexpr double kTailBoundTolerance = 1e-10;

// Lower bound on the lower tail of the symmetric beta distribution:
//   Pr[P < p*] >= (4 p* (1 - p*))^(b - 1) p* / b
//              >= p* exp((log(4 p* (1 - p*)) - 1)(b - 1)).
struct TailBoundReport {
  double p_star = 0.0;
  // beta_cdf(Beta(b, b), p*).
  double true_probability = 0.0;
  double bound_value = 0.0;
  // The weaker exponential form; must not exceed bound_value.
  double exponential_form = 0.0;
  bool satisfied = false;
  bool exponential_form_below_bound = false;
};

// Requires beta_sym >= 1 and p_star in [0, 1/2].
absl::StatusOr<TailBoundReport> TailLowerBound(double beta_sym, double p_star);

// The largest symmetric shape for which the top-k of d draws still averages
// at least 3/4: 1 + (1/2) log(d / (8 max{2k, 28})), natural log. Fails when d
// is below 8 max{2k, 28}.
absl::StatusOr<double> AnticoncentrationBetaChoice(int64_t d, int64_t k);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double ci_halfwidth = 0.0;
};

// Monte Carlo estimate of E[sum of the k largest of d i.i.d. Beta draws].
absl::StatusOr<MonteCarloEstimate> ExpectedTopKSum(const BetaParams& params,
                                                   int64_t d, int64_t k,
                                                   int64_t trials, Rng& rng);

}  // namespace privsel

#endif  // PRIVSEL_BETA_H_
