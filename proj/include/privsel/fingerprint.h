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

#ifndef PRIVSEL_FINGERPRINT_H_
#define PRIVSEL_FINGERPRINT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "privsel/beta.h"
#include "privsel/hard_instance.h"
#include "privsel/mechanisms.h"
#include "privsel/stats.h"

namespace privsel {

// The correlation statistic
//   Z = sum_{i,j} M(X)^j (X_i^j - P^j)
// with its row sums Z_i and column sums Z^j.
struct AttackReport {
  double z_total = 0.0;
  std::vector<double> z_by_row;
  std::vector<double> z_by_col;
  double l2_norm_sq = 0.0;
  std::optional<double> upper_bound_value;
  std::optional<double> lower_bound_proxy;
};

// Exact Z and both decompositions. Column sums use popcounts; row sums walk
// the selected (non-zero) columns only.
absl::StatusOr<AttackReport> ZStatistic(const SelectionOutput& output,
                                        const Dataset& x,
                                        const Population& pop);

// Only z_total and z_by_col, from column sums. Cheaper when rows are not
// needed.
absl::StatusOr<AttackReport> ZStatisticByColumn(const SelectionOutput& output,
                                                const Dataset& x,
                                                const Population& pop);

struct BoundParameters {
  double epsilon = 1.0;
  double delta = 0.0;
  // Half the l1 cap: ||M(X)||_1 <= 2 * half_l1_cap always.
  double half_l1_cap = 1.0;
  double gamma = 0.0;
  double beta_sym = 1.0;

  // epsilon = 1, delta = beta gamma k / (n d), half_l1_cap = d / 2.
  static BoundParameters ForGeneralTheorem(double beta_sym, double gamma,
                                           size_t k, size_t n, size_t d);
};

// n (e^epsilon (1/2) sqrt(E||M||_2^2) + half_l1_cap * delta). Fails when
// expected_l2_sq < 0.
absl::StatusOr<double> PrivacyUpperBound(const BoundParameters& params,
                                         size_t n, double expected_l2_sq);

// 2 beta sum_j M^j (P^j - 1/2) for one realization. Its mean over trials
// estimates the accuracy lower bound on E[Z]. Requires a symmetric prior
// equal to Beta(beta_sym, beta_sym).
absl::StatusOr<double> AccuracyLowerBoundProxy(const SelectionOutput& output,
                                               const Population& pop,
                                               double beta_sym);

inline constexpr int kMaxEnumerationRows = 20;

// A function f on {0,1}^n, given as a table indexed by the bitmask of x
// (bit i of the index is x_i), plus the points p at which to check the
// fingerprinting identity.
struct FingerprintCheck {
  int n = 1;
  std::vector<double> f_table;
  std::vector<double> p_grid;
  double max_abs_residual = 0.0;
};

// For every p on the grid, compares
//   E_{X ~ p^n}[f(X) sum_i (X_i - p)]           (exhaustive enumeration)
// with
//   p (1 - p) g'(p),  g(p) = E_{X ~ p^n}[f(X)]  (g expanded in the power
//                                                basis, differentiated
//                                                term by term)
// and stores the largest absolute difference.
absl::StatusOr<FingerprintCheck> VerifyFingerprintingIdentity(
    FingerprintCheck check);

struct BetaFingerprintResidual {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

// Exact check, through beta-function ratios, of
//   E_{P ~ Beta(a,b), X ~ P^n}[f(X) sum_i (X_i - P)]
//     = (a + b) E_{P ~ Beta(a,b)}[g(P) (P - a/(a+b))].
// The left side expands every (X_i - P) term row by row; the right side
// works on g's Bernstein coefficients.
absl::StatusOr<BetaFingerprintResidual> VerifyBetaFingerprinting(
    const FingerprintCheck& check, const BetaParams& prior);

// <M(X), row - pop_mean>.
absl::StatusOr<double> TracingScore(const SelectionOutput& output,
                                    std::span<const uint8_t> row,
                                    std::span<const double> pop_mean);

struct MembershipOptions {
  MechanismParams mechanism;
  size_t d = 1024;
  size_t n = 25;
  double beta_sym = 1.0;
  int64_t trials = 2000;
  uint64_t master_seed = 1;
  int threads = 0;  // 0 = hardware concurrency
};

struct MembershipResult {
  MeanEstimate member;
  MeanEstimate nonmember;
  // Paired per-trial member-minus-nonmember score.
  MeanEstimate gap;
};

// Per trial: draw a hard instance, run the mechanism, score one uniformly
// chosen member row and one fresh row from the same population.
absl::StatusOr<MembershipResult> MembershipExperiment(
    const MembershipOptions& options);

}  // namespace privsel

#endif  // PRIVSEL_FINGERPRINT_H_
