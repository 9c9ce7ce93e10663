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

#include "privsel/beta.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "absl/strings/str_cat.h"
#include "boost/math/special_functions/beta.hpp"
#include "privsel/stats.h"

namespace privsel {
namespace {

absl::Status ValidateProbability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    return absl::OutOfRangeError(
        absl::StrCat("Probability argument must lie in [0, 1], got ", p));
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status ValidateBetaParams(const BetaParams& params) {
  if (!(params.alpha > 0.0) || !std::isfinite(params.alpha) ||
      !(params.beta > 0.0) || !std::isfinite(params.beta)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Beta shape parameters must be positive and finite, got (",
                     params.alpha, ", ", params.beta, ")"));
  }
  return absl::OkStatus();
}

absl::StatusOr<double> BetaFunction(double a, double b) {
  if (absl::Status s = ValidateBetaParams({a, b}); !s.ok()) return s;
  return boost::math::beta(a, b);
}

absl::StatusOr<double> BetaPdf(const BetaParams& params, double p) {
  if (absl::Status s = ValidateBetaParams(params); !s.ok()) return s;
  if (absl::Status s = ValidateProbability(p); !s.ok()) return s;
  const double a = params.alpha;
  const double b = params.beta;
  // Endpoints by their limits; boost::math::ibeta_derivative handles the
  // interior.
  if (p == 0.0) {
    if (a < 1.0) return std::numeric_limits<double>::infinity();
    if (a > 1.0) return 0.0;
    return 1.0 / boost::math::beta(a, b);
  }
  if (p == 1.0) {
    if (b < 1.0) return std::numeric_limits<double>::infinity();
    if (b > 1.0) return 0.0;
    return 1.0 / boost::math::beta(a, b);
  }
  return boost::math::ibeta_derivative(a, b, p);
}

absl::StatusOr<double> BetaCdf(const BetaParams& params, double p) {
  if (absl::Status s = ValidateBetaParams(params); !s.ok()) return s;
  if (absl::Status s = ValidateProbability(p); !s.ok()) return s;
  return boost::math::ibeta(params.alpha, params.beta, p);
}

absl::StatusOr<BetaMoments> ComputeBetaMoments(const BetaParams& params) {
  if (absl::Status s = ValidateBetaParams(params); !s.ok()) return s;
  const double sum = params.alpha + params.beta;
  return BetaMoments{
      .mean = params.alpha / sum,
      .variance = params.alpha * params.beta / (sum * sum * (sum + 1.0)),
  };
}

double SampleBeta(const BetaParams& params, Rng& rng) {
  std::gamma_distribution<double> left(params.alpha, 1.0);
  std::gamma_distribution<double> right(params.beta, 1.0);
  const double g1 = left(rng);
  const double g2 = right(rng);
  const double total = g1 + g2;
  // Both gammas can underflow to zero for tiny shapes; fall back to a fair
  // coin between the two endpoints, which is the small-shape limit.
  if (total == 0.0) return (rng() & 1) ? 1.0 : 0.0;
  return g1 / total;
}

absl::StatusOr<TailBoundReport> TailLowerBound(double beta_sym,
                                               double p_star) {
  if (!(beta_sym >= 1.0) || !std::isfinite(beta_sym)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Tail bound requires beta >= 1, got ", beta_sym));
  }
  if (!(p_star >= 0.0 && p_star <= 0.5)) {
    return absl::OutOfRangeError(
        absl::StrCat("Tail bound requires p* in [0, 1/2], got ", p_star));
  }
  TailBoundReport report;
  report.p_star = p_star;
  const double q = 4.0 * p_star * (1.0 - p_star);
  report.bound_value = std::pow(q, beta_sym - 1.0) * p_star / beta_sym;
  report.exponential_form =
      p_star == 0.0 ? 0.0
                    : p_star * std::exp((std::log(q) - 1.0) * (beta_sym - 1.0));
  absl::StatusOr<double> cdf = BetaCdf(BetaParams::Symmetric(beta_sym), p_star);
  if (!cdf.ok()) return cdf.status();
  report.true_probability = *cdf;
  report.satisfied =
      report.true_probability >= report.bound_value - kTailBoundTolerance;
  // Relative slack: both sides agree exactly at beta = 1.
  report.exponential_form_below_bound =
      report.exponential_form <=
      report.bound_value * (1.0 + 1e-12) + std::numeric_limits<double>::min();
  return report;
}

absl::StatusOr<double> AnticoncentrationBetaChoice(int64_t d, int64_t k) {
  if (k < 1) {
    return absl::InvalidArgumentError(absl::StrCat("k must be >= 1, got ", k));
  }
  const int64_t min_d = 8 * std::max<int64_t>(2 * k, 28);
  if (d < min_d) {
    return absl::FailedPreconditionError(absl::StrCat(
        "Anti-concentration choice needs d >= 8*max{2k, 28} = ", min_d,
        " for k = ", k, ", got d = ", d));
  }
  return 1.0 + 0.5 * std::log(static_cast<double>(d) /
                              static_cast<double>(min_d));
}

absl::StatusOr<MonteCarloEstimate> ExpectedTopKSum(const BetaParams& params,
                                                   int64_t d, int64_t k,
                                                   int64_t trials, Rng& rng) {
  if (absl::Status s = ValidateBetaParams(params); !s.ok()) return s;
  if (d < 1 || k < 1 || k > d) {
    return absl::InvalidArgumentError(
        absl::StrCat("Need 1 <= k <= d, got k = ", k, ", d = ", d));
  }
  if (trials < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("trials must be >= 1, got ", trials));
  }
  std::vector<double> draws(static_cast<size_t>(d));
  std::vector<double> sums(static_cast<size_t>(trials));
  for (double& trial_sum : sums) {
    for (double& v : draws) v = SampleBeta(params, rng);
    std::nth_element(draws.begin(), draws.begin() + (k - 1), draws.end(),
                     std::greater<>());
    CompensatedSum acc;
    for (int64_t i = 0; i < k; ++i) acc.Add(draws[static_cast<size_t>(i)]);
    trial_sum = acc.Total();
  }
  const MeanEstimate mean = EstimateMean(sums);
  return MonteCarloEstimate{mean.mean, mean.ci_halfwidth};
}

}  // namespace privsel
