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

#include "privsel/fingerprint.h"

#include <bit>
#include <cmath>
#include <mutex>

#include "absl/strings/str_cat.h"
#include "boost/math/special_functions/beta.hpp"
#include "privsel/parallel.h"

namespace privsel {
namespace {

absl::Status CheckDimensions(const SelectionOutput& output, const Dataset& x,
                             const Population& pop) {
  if (output.d() != x.d() || pop.d() != x.d()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Dimension mismatch: output d = ", output.d(), ", dataset d = ", x.d(),
        ", population d = ", pop.d()));
  }
  return absl::OkStatus();
}

absl::Status CheckTable(const FingerprintCheck& check) {
  if (check.n < 1 || check.n > kMaxEnumerationRows) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Enumeration needs 1 <= n <= ", kMaxEnumerationRows, ", got ",
        check.n));
  }
  const size_t expected = size_t{1} << check.n;
  if (check.f_table.size() != expected) {
    return absl::InvalidArgumentError(absl::StrCat(
        "f table has ", check.f_table.size(), " entries, expected 2^",
        check.n, " = ", expected));
  }
  return absl::OkStatus();
}

// F_s = sum of f over inputs of Hamming weight s, so that
// g(p) = sum_s F_s p^s (1-p)^(n-s).
std::vector<double> WeightClassSums(const FingerprintCheck& check) {
  std::vector<CompensatedSum> acc(static_cast<size_t>(check.n) + 1);
  for (size_t x = 0; x < check.f_table.size(); ++x) {
    acc[std::popcount(x)].Add(check.f_table[x]);
  }
  std::vector<double> out(acc.size());
  for (size_t s = 0; s < acc.size(); ++s) out[s] = acc[s].Total();
  return out;
}

double Binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

// E[P^u (1-P)^v] for P ~ Beta(a, b) as a running product of moment ratios.
double MixedMomentByProduct(double a, double b, int u, int v) {
  double out = 1.0;
  for (int l = 0; l < u; ++l) out *= (a + l) / (a + b + l);
  for (int l = 0; l < v; ++l) out *= (b + l) / (a + b + u + l);
  return out;
}

}  // namespace

absl::StatusOr<AttackReport> ZStatisticByColumn(const SelectionOutput& output,
                                                const Dataset& x,
                                                const Population& pop) {
  if (absl::Status s = CheckDimensions(output, x, pop); !s.ok()) return s;
  AttackReport report;
  report.l2_norm_sq = output.l2_norm_sq;
  report.z_by_col.assign(x.d(), 0.0);
  const double n = static_cast<double>(x.n());
  CompensatedSum total;
  for (size_t j = 0; j < x.d(); ++j) {
    const double m = output.scores[j];
    if (m == 0.0) continue;
    report.z_by_col[j] =
        m * (static_cast<double>(x.ColumnSum(j)) - n * pop.means[j]);
    total.Add(report.z_by_col[j]);
  }
  report.z_total = total.Total();
  return report;
}

absl::StatusOr<AttackReport> ZStatistic(const SelectionOutput& output,
                                        const Dataset& x,
                                        const Population& pop) {
  absl::StatusOr<AttackReport> report = ZStatisticByColumn(output, x, pop);
  if (!report.ok()) return report;
  // Z_i = sum_j M^j X_i^j - sum_j M^j P^j.
  CompensatedSum offset;
  for (size_t j = 0; j < x.d(); ++j) {
    offset.Add(output.scores[j] * pop.means[j]);
  }
  std::vector<CompensatedSum> rows(x.n());
  for (size_t j = 0; j < x.d(); ++j) {
    const double m = output.scores[j];
    if (m == 0.0) continue;
    const std::span<const uint64_t> words = x.ColumnWords(j);
    for (size_t w = 0; w < words.size(); ++w) {
      for (uint64_t bits = words[w]; bits != 0; bits &= bits - 1) {
        rows[w * 64 + std::countr_zero(bits)].Add(m);
      }
    }
  }
  report->z_by_row.resize(x.n());
  for (size_t i = 0; i < x.n(); ++i) {
    rows[i].Add(-offset.Total());
    report->z_by_row[i] = rows[i].Total();
  }
  return report;
}

BoundParameters BoundParameters::ForGeneralTheorem(double beta_sym,
                                                   double gamma, size_t k,
                                                   size_t n, size_t d) {
  return BoundParameters{
      .epsilon = 1.0,
      .delta = beta_sym * gamma * static_cast<double>(k) /
               (static_cast<double>(n) * static_cast<double>(d)),
      .half_l1_cap = static_cast<double>(d) / 2.0,
      .gamma = gamma,
      .beta_sym = beta_sym,
  };
}

absl::StatusOr<double> PrivacyUpperBound(const BoundParameters& params,
                                         size_t n, double expected_l2_sq) {
  if (!(expected_l2_sq >= 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Expected squared l2 norm must be non-negative, got ", expected_l2_sq));
  }
  return static_cast<double>(n) *
         (std::exp(params.epsilon) * 0.5 * std::sqrt(expected_l2_sq) +
          params.half_l1_cap * params.delta);
}

absl::StatusOr<double> AccuracyLowerBoundProxy(const SelectionOutput& output,
                                               const Population& pop,
                                               double beta_sym) {
  if (!pop.prior.is_symmetric() || pop.prior.alpha != beta_sym) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Accuracy lower bound needs the symmetric prior Beta(", beta_sym, ", ",
        beta_sym, "), population prior is Beta(", pop.prior.alpha, ", ",
        pop.prior.beta, ")"));
  }
  if (output.d() != pop.d()) {
    return absl::InvalidArgumentError("Output and population widths differ");
  }
  CompensatedSum acc;
  for (size_t j = 0; j < pop.d(); ++j) {
    acc.Add(output.scores[j] * (pop.means[j] - 0.5));
  }
  return 2.0 * beta_sym * acc.Total();
}

absl::StatusOr<FingerprintCheck> VerifyFingerprintingIdentity(
    FingerprintCheck check) {
  if (absl::Status s = CheckTable(check); !s.ok()) return s;
  const int n = check.n;

  // Power-basis coefficients of g: p^s (1-p)^(n-s) contributes
  // F_s C(n-s, m) (-1)^m to the coefficient of p^(s+m).
  const std::vector<double> weight_sums = WeightClassSums(check);
  std::vector<double> g_coeffs(static_cast<size_t>(n) + 1, 0.0);
  for (int s = 0; s <= n; ++s) {
    for (int m = 0; m <= n - s; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      g_coeffs[s + m] += weight_sums[s] * sign * Binomial(n - s, m);
    }
  }
  // g'(p) coefficients.
  std::vector<double> derivative(static_cast<size_t>(n), 0.0);
  for (int t = 1; t <= n; ++t) derivative[t - 1] = t * g_coeffs[t];

  double worst = 0.0;
  for (double p : check.p_grid) {
    if (!(p >= 0.0 && p <= 1.0)) {
      return absl::OutOfRangeError(
          absl::StrCat("Grid point ", p, " is outside [0, 1]"));
    }
    CompensatedSum lhs;
    for (size_t x = 0; x < check.f_table.size(); ++x) {
      double weight = 1.0;
      double centered = 0.0;
      for (int i = 0; i < n; ++i) {
        const bool bit = (x >> i) & 1u;
        weight *= bit ? p : (1.0 - p);
        centered += (bit ? 1.0 : 0.0) - p;
      }
      lhs.Add(check.f_table[x] * centered * weight);
    }
    double g_prime = 0.0;
    for (size_t t = derivative.size(); t-- > 0;) {
      g_prime = g_prime * p + derivative[t];
    }
    const double rhs = p * (1.0 - p) * g_prime;
    worst = std::max(worst, std::abs(lhs.Total() - rhs));
  }
  check.max_abs_residual = worst;
  return check;
}

absl::StatusOr<BetaFingerprintResidual> VerifyBetaFingerprinting(
    const FingerprintCheck& check, const BetaParams& prior) {
  if (absl::Status s = CheckTable(check); !s.ok()) return s;
  if (absl::Status s = ValidateBetaParams(prior); !s.ok()) return s;
  const int n = check.n;
  const double a = prior.alpha;
  const double b = prior.beta;
  const double normalizer = boost::math::beta(a, b);
  // E[P^u (1-P)^v] = B(a+u, b+v) / B(a, b).
  auto moment = [&](int u, int v) {
    return boost::math::beta(a + u, b + v) / normalizer;
  };

  // Left side, one (x_i - P) factor at a time:
  //   x_i = 1 contributes f(x) E[P^s (1-P)^(n-s+1)],
  //   x_i = 0 contributes -f(x) E[P^(s+1) (1-P)^(n-s)].
  CompensatedSum lhs;
  for (size_t x = 0; x < check.f_table.size(); ++x) {
    const int s = std::popcount(x);
    for (int i = 0; i < n; ++i) {
      if ((x >> i) & 1u) {
        lhs.Add(check.f_table[x] * moment(s, n - s + 1));
      } else {
        lhs.Add(-check.f_table[x] * moment(s + 1, n - s));
      }
    }
  }

  // Right side from g's Bernstein-form coefficients, with moments taken by
  // the product formula instead of the beta function.
  const std::vector<double> weight_sums = WeightClassSums(check);
  const double mean = a / (a + b);
  CompensatedSum rhs;
  for (int s = 0; s <= n; ++s) {
    const double shifted = MixedMomentByProduct(a, b, s + 1, n - s) -
                           mean * MixedMomentByProduct(a, b, s, n - s);
    rhs.Add((a + b) * weight_sums[s] * shifted);
  }

  BetaFingerprintResidual out;
  out.lhs = lhs.Total();
  out.rhs = rhs.Total();
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

absl::StatusOr<double> TracingScore(const SelectionOutput& output,
                                    std::span<const uint8_t> row,
                                    std::span<const double> pop_mean) {
  if (row.size() != output.d() || pop_mean.size() != output.d()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Dimension mismatch: output d = ", output.d(), ", row length ",
        row.size(), ", mean length ", pop_mean.size()));
  }
  CompensatedSum acc;
  for (size_t j = 0; j < row.size(); ++j) {
    if (output.scores[j] == 0.0) continue;
    acc.Add(output.scores[j] * (static_cast<double>(row[j]) - pop_mean[j]));
  }
  return acc.Total();
}

absl::StatusOr<MembershipResult> MembershipExperiment(
    const MembershipOptions& options) {
  if (options.trials < 1) {
    return absl::InvalidArgumentError("trials must be >= 1");
  }
  const BetaParams prior = BetaParams::Symmetric(options.beta_sym);
  if (absl::Status s = ValidateBetaParams(prior); !s.ok()) return s;
  if (options.n < 1 || options.d < 1) {
    return absl::InvalidArgumentError("n and d must be >= 1");
  }
  const size_t trials = static_cast<size_t>(options.trials);
  std::vector<double> member(trials);
  std::vector<double> nonmember(trials);
  std::vector<double> gap(trials);
  absl::Status first_error;
  std::mutex error_mu;

  ParallelFor(options.trials, options.threads, [&](int64_t t) {
    Rng rng = MakeStream(options.master_seed, static_cast<uint64_t>(t));
    auto fail = [&](const absl::Status& s) {
      std::lock_guard<std::mutex> lock(error_mu);
      if (first_error.ok()) first_error = s;
    };
    absl::StatusOr<Population> pop = SamplePopulation(options.d, prior, rng);
    if (!pop.ok()) return fail(pop.status());
    absl::StatusOr<Dataset> x = SampleDataset(*pop, options.n, rng);
    if (!x.ok()) return fail(x.status());
    absl::StatusOr<SelectionOutput> out =
        RunMechanism(options.mechanism, *x, rng);
    if (!out.ok()) return fail(out.status());
    const size_t i = static_cast<size_t>(rng() % options.n);
    const std::vector<uint8_t> member_row = x->Row(i);
    const std::vector<uint8_t> fresh_row = SampleRow(*pop, rng);
    absl::StatusOr<double> in = TracingScore(*out, member_row, pop->means);
    absl::StatusOr<double> outside = TracingScore(*out, fresh_row, pop->means);
    if (!in.ok()) return fail(in.status());
    if (!outside.ok()) return fail(outside.status());
    member[t] = *in;
    nonmember[t] = *outside;
    gap[t] = *in - *outside;
  });
  if (!first_error.ok()) return first_error;

  return MembershipResult{
      .member = EstimateMean(member),
      .nonmember = EstimateMean(nonmember),
      .gap = EstimateMean(gap),
  };
}

}  // namespace privsel
