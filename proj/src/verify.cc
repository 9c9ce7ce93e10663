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

#include "privsel/verify.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "privsel/beta.h"
#include "privsel/fingerprint.h"
#include "privsel/hard_instance.h"
#include "privsel/parallel.h"
#include "privsel/quadrature.h"
#include "privsel/random.h"

namespace privsel {
namespace {

constexpr double kShapeGrid[] = {0.5, 1.0, 2.0, 5.0};
constexpr double kExactTolerance = 1e-9;
constexpr int kRandomTables = 50;
// Asymptotic Kolmogorov-Smirnov critical value at level 0.001.
constexpr double kKsCritical = 1.949;
constexpr int64_t kKsDraws = 100000;

CheckResult Named(std::string name, double limit) {
  CheckResult r;
  r.name = std::move(name);
  r.limit = limit;
  return r;
}

CheckResult Fail(std::string name, std::string detail) {
  CheckResult r;
  r.name = std::move(name);
  r.detail = std::move(detail);
  return r;
}

template <typename Fn>
CheckResult Timed(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r = fn();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            start)
                  .count();
  return r;
}

std::vector<double> RandomTable(int n, Rng& rng) {
  std::vector<double> table(size_t{1} << n);
  for (double& v : table) v = UniformOpen01(rng);
  return table;
}

}  // namespace

CheckResult CheckPdfNormalization() {
  return Timed([] {
    CheckResult r = Named("beta_pdf_normalization", kExactTolerance);
    // p = sin^2(theta) tames the endpoint singularities of shapes below 1.
    // Only p <= 1/2 is integrated directly; the upper half is the lower half
    // of the reflected density, which avoids forming 1 - p near p = 1.
    constexpr double kEdge = 1e-12;
    auto lower_half = [](const BetaParams& params) {
      return AdaptiveSimpson(
          [&](double theta) {
            const double s = std::sin(theta);
            const double c = std::cos(theta);
            absl::StatusOr<double> pdf = BetaPdf(params, s * s);
            return pdf.ok() ? *pdf * 2.0 * s * c : 0.0;
          },
          kEdge, std::numbers::pi / 4, 1e-13);
    };
    for (double a : kShapeGrid) {
      for (double b : kShapeGrid) {
        const double mass = lower_half({a, b}) + lower_half({b, a});
        const double err = std::abs(mass - 1.0);
        if (err > r.value) {
          r.value = err;
          r.detail = absl::StrCat("worst at (", a, ", ", b, ")");
        }
      }
    }
    r.passed = r.value <= r.limit;
    return r;
  });
}

CheckResult CheckCdfMonotone() {
  return Timed([] {
    CheckResult r = Named("beta_cdf_monotone", 0.0);
    constexpr int kPoints = 1000;
    for (double a : kShapeGrid) {
      for (double b : kShapeGrid) {
        double prev = 0.0;
        for (int i = 0; i <= kPoints; ++i) {
          absl::StatusOr<double> c =
              BetaCdf({a, b}, static_cast<double>(i) / kPoints);
          if (!c.ok()) return Fail(r.name, std::string(c.status().message()));
          r.value = std::max(r.value, prev - *c);
          prev = *c;
        }
        if (prev != 1.0) {
          return Fail(r.name, absl::StrCat("cdf(1) = ", prev, " at (", a, ", ",
                                           b, ")"));
        }
      }
    }
    r.passed = r.value <= 0.0;
    r.detail = "largest decrease between consecutive grid points";
    return r;
  });
}

CheckResult CheckCdfSymmetry() {
  return Timed([] {
    CheckResult r = Named("beta_cdf_symmetry", 1e-12);
    for (double b : kShapeGrid) {
      for (int i = 0; i <= 100; ++i) {
        const double p = i / 100.0;
        absl::StatusOr<double> lo = BetaCdf(BetaParams::Symmetric(b), p);
        absl::StatusOr<double> hi = BetaCdf(BetaParams::Symmetric(b), 1.0 - p);
        if (!lo.ok() || !hi.ok()) return Fail(r.name, "cdf evaluation failed");
        r.value = std::max(r.value, std::abs(*lo + *hi - 1.0));
      }
    }
    r.passed = r.value <= r.limit;
    return r;
  });
}

CheckResult CheckCdfAgainstQuadrature() {
  return Timed([] {
    CheckResult r = Named("beta_cdf_vs_quadrature", kQuadratureTolerance);
    for (double a : kShapeGrid) {
      for (double b : kShapeGrid) {
        for (double p : {0.01, 0.1, 0.25, 0.5, 0.7, 0.9, 0.99}) {
          absl::StatusOr<double> c = BetaCdf({a, b}, p);
          if (!c.ok()) return Fail(r.name, std::string(c.status().message()));
          const double q = BetaMassByQuadrature(a, b, 0.0, p);
          const double err = std::abs(*c - q);
          if (err > r.value) {
            r.value = err;
            r.detail = absl::StrCat("worst at (", a, ", ", b, ") p = ", p);
          }
        }
      }
    }
    r.passed = r.value <= r.limit;
    return r;
  });
}

CheckResult CheckTailBoundGrid() {
  return Timed([] {
    CheckResult r = Named("tail_lower_bound_grid", kQuadratureTolerance);
    // value: worst shortfall of the quadrature mass below the bound, or the
    // worst disagreement between the two cdf routes, whichever is larger.
    r.passed = true;
    for (double b : {1.0, 1.5, 2.0, 3.0, 5.0}) {
      for (double p : {0.05, 0.1, 0.125, 0.25, 0.5}) {
        absl::StatusOr<TailBoundReport> t = TailLowerBound(b, p);
        if (!t.ok()) return Fail(r.name, std::string(t.status().message()));
        const double q = BetaMassByQuadrature(b, b, 0.0, p);
        const double gap = std::max(std::abs(q - t->true_probability),
                                    t->bound_value - q);
        r.value = std::max(r.value, gap);
        if (!t->satisfied || !t->exponential_form_below_bound ||
            q < t->bound_value - kQuadratureTolerance) {
          r.passed = false;
          r.detail = absl::StrCat("violated at beta = ", b, ", p* = ", p);
        }
      }
    }
    r.passed = r.passed && r.value <= r.limit;
    return r;
  });
}

CheckResult CheckSamplerKolmogorovSmirnov(uint64_t seed) {
  return Timed([seed] {
    CheckResult r = Named("beta_sampler_ks", kKsCritical / std::sqrt(static_cast<double>(kKsDraws)));
    const BetaParams cases[] = {{0.5, 0.5}, {2.0, 5.0}, {1.0, 1.0},
                                {1.75991287687220662, 1.75991287687220662}};
    uint64_t stream = 0;
    for (const BetaParams& params : cases) {
      Rng rng = MakeStream(seed, stream++);
      std::vector<double> draws(kKsDraws);
      for (double& x : draws) x = SampleBeta(params, rng);
      std::sort(draws.begin(), draws.end());
      const double ks = KolmogorovSmirnovDistance(draws, [&](double x) {
        absl::StatusOr<double> c = BetaCdf(params, x);
        return c.ok() ? *c : 0.0;
      });
      if (ks > r.value) {
        r.value = ks;
        r.detail =
            absl::StrCat("worst at (", params.alpha, ", ", params.beta, ")");
      }
    }
    r.passed = r.value < r.limit;
    return r;
  });
}

CheckResult CheckFingerprintingIdentity(uint64_t seed) {
  return Timed([seed] {
    CheckResult r = Named("fingerprinting_identity", kExactTolerance);
    Rng rng = MakeStream(seed, 0);
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i) grid.push_back((i + 0.5) / 20.0);
    for (int t = 0; t < kRandomTables; ++t) {
      FingerprintCheck check;
      check.n = 1 + t % 10;
      check.f_table = RandomTable(check.n, rng);
      check.p_grid = grid;
      absl::StatusOr<FingerprintCheck> out =
          VerifyFingerprintingIdentity(std::move(check));
      if (!out.ok()) return Fail(r.name, std::string(out.status().message()));
      r.value = std::max(r.value, out->max_abs_residual);
    }
    r.passed = r.value <= r.limit;
    return r;
  });
}

CheckResult CheckBetaFingerprinting(uint64_t seed) {
  return Timed([seed] {
    CheckResult r = Named("beta_fingerprinting", kExactTolerance);
    Rng rng = MakeStream(seed, 1);
    for (double a : kShapeGrid) {
      for (double b : kShapeGrid) {
        for (int t = 0; t < kRandomTables; ++t) {
          FingerprintCheck check;
          check.n = 1 + t % 8;
          check.f_table = RandomTable(check.n, rng);
          absl::StatusOr<BetaFingerprintResidual> res =
              VerifyBetaFingerprinting(check, {a, b});
          if (!res.ok()) {
            return Fail(r.name, std::string(res.status().message()));
          }
          if (res->residual > r.value) {
            r.value = res->residual;
            r.detail = absl::StrCat("worst at (", a, ", ", b, ") n = ", check.n);
          }
        }
      }
    }
    r.passed = r.value <= r.limit;
    return r;
  });
}

CheckResult CheckExpMechPrivacyRatio() {
  return Timed([] {
    CheckResult r = Named("exp_mech_privacy_ratio", 1.0);
    constexpr size_t kN = 2;
    constexpr size_t kD = 3;
    constexpr int kBits = kN * kD;
    // value: the largest P[x](j) / (e^eps P[x'](j)) over neighbours x, x'.
    for (double eps : {0.5, 1.0}) {
      for (unsigned mask = 0; mask < (1u << kD) - 1; ++mask) {
        std::vector<bool> exclude(kD);
        for (size_t j = 0; j < kD; ++j) exclude[j] = (mask >> j) & 1u;
        std::vector<std::vector<double>> probs(size_t{1} << kBits);
        for (unsigned x = 0; x < probs.size(); ++x) {
          std::vector<double> means(kD, 0.0);
          for (size_t i = 0; i < kN; ++i) {
            for (size_t j = 0; j < kD; ++j) {
              means[j] += ((x >> (i * kD + j)) & 1u) / static_cast<double>(kN);
            }
          }
          absl::StatusOr<std::vector<double>> p =
              ExpMechProbabilities(means, kN, eps, exclude);
          if (!p.ok()) return Fail(r.name, std::string(p.status().message()));
          probs[x] = *std::move(p);
        }
        const double bound = std::exp(eps);
        for (unsigned x = 0; x < probs.size(); ++x) {
          for (size_t i = 0; i < kN; ++i) {
            const unsigned row_mask = ((1u << kD) - 1) << (i * kD);
            for (unsigned row = 0; row < (1u << kD); ++row) {
              const unsigned y = (x & ~row_mask) | (row << (i * kD));
              for (size_t j = 0; j < kD; ++j) {
                if (exclude[j]) continue;
                r.value = std::max(r.value, probs[x][j] / (bound * probs[y][j]));
              }
            }
          }
        }
      }
    }
    r.passed = r.value <= r.limit * (1.0 + 1e-12);
    r.detail = "max over neighbours of P[x](j) / (e^eps P[x'](j))";
    return r;
  });
}

absl::StatusOr<PerColumnEquality> MeasurePerColumnEquality(
    const PerColumnOptions& options) {
  if (options.trials < 2) {
    return absl::InvalidArgumentError("trials must be at least 2");
  }
  MechanismParams params;
  params.kind = options.mechanism;
  params.k = options.k;
  params.epsilon = options.epsilon;
  params.delta = options.delta;
  params.svt.k_bound = static_cast<int>(4 * options.k);
  const size_t d = options.d;
  const size_t trials = static_cast<size_t>(options.trials);
  // Trial-major buffers, one slot per trial.
  std::vector<double> z(trials * d);
  std::vector<double> proxy(trials * d);
  std::vector<absl::Status> errors(trials);
  ParallelFor(options.trials, options.threads, [&](int64_t t) {
    Rng rng = MakeStream(options.master_seed, static_cast<uint64_t>(t));
    absl::StatusOr<Population> pop = SamplePopulation(
        d, BetaParams::Symmetric(options.beta_sym), rng);
    if (!pop.ok()) {
      errors[t] = pop.status();
      return;
    }
    absl::StatusOr<Dataset> x = SampleDataset(*pop, options.n, rng);
    if (!x.ok()) {
      errors[t] = x.status();
      return;
    }
    absl::StatusOr<SelectionOutput> out = RunMechanism(params, *x, rng);
    if (!out.ok()) {
      errors[t] = out.status();
      return;
    }
    absl::StatusOr<AttackReport> report = ZStatisticByColumn(*out, *x, *pop);
    if (!report.ok()) {
      errors[t] = report.status();
      return;
    }
    for (size_t j = 0; j < d; ++j) {
      z[t * d + j] = report->z_by_col[j];
      proxy[t * d + j] =
          2.0 * options.beta_sym * out->scores[j] * (pop->means[j] - 0.5);
    }
  });
  for (const absl::Status& s : errors) {
    if (!s.ok()) return s;
  }
  PerColumnEquality result;
  std::vector<double> zc(trials), pc(trials), dc(trials);
  for (size_t j = 0; j < d; ++j) {
    for (size_t t = 0; t < trials; ++t) {
      zc[t] = z[t * d + j];
      pc[t] = proxy[t * d + j];
      dc[t] = zc[t] - pc[t];
    }
    result.z.push_back(EstimateMean(zc));
    result.proxy.push_back(EstimateMean(pc));
    result.difference.push_back(EstimateMean(dc));
    if (result.difference.back().Covers(0.0)) ++result.agreeing;
  }
  return result;
}

CheckResult CheckPerColumnEquality(const PerColumnOptions& options,
                                   size_t max_disagreeing) {
  return Timed([&] {
    CheckResult r = Named("per_column_fingerprinting_equality", static_cast<double>(max_disagreeing));
    absl::StatusOr<PerColumnEquality> eq = MeasurePerColumnEquality(options);
    if (!eq.ok()) return Fail(r.name, std::string(eq.status().message()));
    r.value = static_cast<double>(options.d - eq->agreeing);
    r.passed = r.value <= r.limit;
    r.detail = absl::StrCat(eq->agreeing, " of ", options.d,
                            " columns agree within 3 sigma over ",
                            options.trials, " trials");
    return r;
  });
}

std::vector<CheckResult> RunVerificationSuite(const VerifyOptions& options) {
  PerColumnOptions per_column;
  per_column.trials = options.equality_trials;
  per_column.master_seed = options.master_seed;
  per_column.threads = options.threads;
  return {
      CheckPdfNormalization(),
      CheckCdfMonotone(),
      CheckCdfSymmetry(),
      CheckCdfAgainstQuadrature(),
      CheckTailBoundGrid(),
      CheckSamplerKolmogorovSmirnov(options.master_seed),
      CheckFingerprintingIdentity(options.master_seed),
      CheckBetaFingerprinting(options.master_seed),
      CheckExpMechPrivacyRatio(),
      CheckPerColumnEquality(per_column, 2),
  };
}

bool AllPassed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.passed; });
}

void WriteVerificationJson(std::ostream& out,
                           const std::vector<CheckResult>& results) {
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckResult& r : results) {
    checks.push_back({{"name", r.name},
                      {"passed", r.passed},
                      {"value", r.value},
                      {"limit", r.limit},
                      {"detail", r.detail},
                      {"seconds", r.seconds}});
  }
  out << nlohmann::json{{"passed", AllPassed(results)}, {"checks", checks}}
             .dump(2)
      << '\n';
}

}  // namespace privsel
