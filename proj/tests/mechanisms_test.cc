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
#include <map>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "privsel/hard_instance.h"
#include "privsel/random.h"
#include "privsel/stats.h"
#include "test_util.h"

namespace privsel {
namespace {

TEST(PrivacyBudgetTest, PeelingSplit) {
  ASSERT_OK_AND_ASSIGN(PrivacyBudget b, PrivacyBudget::ForPeeling(1.0, 1e-6, 8));
  const double expected = 1.0 / std::sqrt(64.0 * std::log(std::exp(1.0) / 1e-6));
  EXPECT_NEAR(b.per_round_epsilon, expected, 1e-15);
  EXPECT_EQ(b.rounds, 8);
  EXPECT_NEAR(PeelingPerRoundEpsilon(1.0, 1e-6, 8), expected, 1e-15);
}

TEST(PrivacyBudgetTest, PeelingRefusesZeroDelta) {
  EXPECT_EQ(PrivacyBudget::ForPeeling(1.0, 0.0, 4).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(PrivacyBudget::ForPeeling(0.0, 1e-6, 4).ok());
  EXPECT_FALSE(PrivacyBudget::ForPeeling(1.0, 1e-6, 0).ok());
  ASSERT_OK_AND_ASSIGN(PrivacyBudget pure, PrivacyBudget::PureEpsilon(0.5));
  EXPECT_EQ(pure.per_round_epsilon, 0.5);
}

TEST(SelectionOutputTest, NormsAndIndicator) {
  const SelectionOutput a = SelectionOutput::FromScores({1, 0, -0.5});
  EXPECT_EQ(a.l1_norm, 1.5);
  EXPECT_EQ(a.l2_norm_sq, 1.25);
  EXPECT_FALSE(a.is_indicator);
  const std::vector<size_t> idx = {3, 1};
  const SelectionOutput b = SelectionOutput::FromIndices(5, idx);
  EXPECT_TRUE(b.is_indicator);
  EXPECT_EQ(b.l1_norm, 2.0);
  EXPECT_EQ(b.l2_norm_sq, 2.0);
  EXPECT_EQ(b.SelectedIndices(), (std::vector<size_t>{1, 3}));
}

TEST(HypothesisTestSpecTest, Defaults) {
  HypothesisTestSpec spec;
  EXPECT_OK(spec.Validate());
  EXPECT_EQ(spec.tau, 0.875);
  EXPECT_EQ(spec.tau_prime, 0.6875);
  EXPECT_EQ(spec.midpoint(), 0.78125);
  spec.tau_prime = 0.9;
  EXPECT_FALSE(spec.Validate().ok());
}

TEST(MechanismNameTest, RoundTrip) {
  for (const char* name :
       {"peeling", "rnm", "svt", "gauss-mean", "first-k", "nonprivate"}) {
    ASSERT_OK_AND_ASSIGN(MechanismKind kind, ParseMechanismName(name));
    EXPECT_EQ(MechanismName(kind), name);
  }
  EXPECT_FALSE(ParseMechanismName("laplace").ok());
}

TEST(ExpMechTest, TwoColumnSoftmax) {
  const std::vector<double> means = {1.0, 0.0};
  ASSERT_OK_AND_ASSIGN(auto p, ExpMechProbabilities(means, 2, 1.0, {}));
  const double e = std::exp(1.0);
  EXPECT_NEAR(p[0], e / (e + 1.0), 1e-15);
  EXPECT_NEAR(p[0], 0.7310585786300049, 1e-15);
}

TEST(ExpMechTest, ExclusionForcesRemainingColumn) {
  const std::vector<double> means = {0.9, 0.8, 0.1};
  Rng rng = MakeStream(1, 0);
  const std::vector<bool> exclude = {true, true, false};
  for (int i = 0; i < 100; ++i) {
    ASSERT_OK_AND_ASSIGN(size_t j,
                         ExpMechSelectOne(means, 10, 1.0, exclude, rng));
    EXPECT_EQ(j, 2u);
  }
  const std::vector<bool> all = {true, true, true};
  EXPECT_FALSE(ExpMechSelectOne(means, 10, 1.0, all, rng).ok());
}

TEST(ExpMechTest, GumbelSamplerMatchesSoftmax) {
  const std::vector<double> means = {0.2, 0.5, 0.9, 0.4};
  ASSERT_OK_AND_ASSIGN(auto p, ExpMechProbabilities(means, 5, 1.0, {}));
  Rng rng = MakeStream(2, 0);
  constexpr int kDraws = 100000;
  std::vector<std::vector<double>> hits(4, std::vector<double>(kDraws, 0.0));
  for (int t = 0; t < kDraws; ++t) {
    ASSERT_OK_AND_ASSIGN(size_t j, ExpMechSelectOne(means, 5, 1.0, {}, rng));
    hits[j][t] = 1.0;
  }
  for (size_t j = 0; j < 4; ++j) {
    EXPECT_TRUE(EstimateMean(hits[j]).Covers(p[j])) << j;
  }
}

TEST(ExpMechTest, VanishingEpsilonIsUniform) {
  const std::vector<double> means = {0.0, 1.0, 0.5};
  Rng rng = MakeStream(3, 0);
  constexpr int kDraws = 100000;
  std::vector<double> counts(3, 0.0);
  for (int t = 0; t < kDraws; ++t) {
    ASSERT_OK_AND_ASSIGN(size_t j, ExpMechSelectOne(means, 10, 1e-12, {}, rng));
    counts[j] += 1.0;
  }
  // Pearson chi-square, 2 degrees of freedom; the 0.999 quantile is
  // 2 log(1000).
  const double expected = kDraws / 3.0;
  double chi_sq = 0.0;
  for (double c : counts) chi_sq += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi_sq, 2.0 * std::log(1000.0));
}

TEST(ExpMechTest, NeighbouringRatioBoundedExactly) {
  // Exhaustive over n = 2, d = 3: changing one row moves each mean by at most
  // 1/2.
  for (double eps : {0.5, 1.0}) {
    std::vector<std::vector<double>> probs;
    for (unsigned x = 0; x < 64; ++x) {
      std::vector<double> means(3, 0.0);
      for (int b = 0; b < 6; ++b) means[b % 3] += ((x >> b) & 1u) * 0.5;
      ASSERT_OK_AND_ASSIGN(auto p, ExpMechProbabilities(means, 2, eps, {}));
      probs.push_back(p);
    }
    for (unsigned x = 0; x < 64; ++x) {
      for (unsigned row : {0u, 1u}) {
        for (unsigned v = 0; v < 8; ++v) {
          const unsigned mask = 7u << (3 * row);
          const unsigned y = (x & ~mask) | (v << (3 * row));
          for (size_t j = 0; j < 3; ++j) {
            ASSERT_LE(probs[x][j], std::exp(eps) * probs[y][j] * (1 + 1e-12));
          }
        }
      }
    }
  }
}

TEST(PeelingTest, AllColumnsWhenKEqualsD) {
  const std::vector<double> means = {0.1, 0.7, 0.3};
  Rng rng = MakeStream(4, 0);
  ASSERT_OK_AND_ASSIGN(PrivacyBudget b, PrivacyBudget::ForPeeling(1, 1e-6, 3));
  ASSERT_OK_AND_ASSIGN(SelectionOutput out, PeelingTopK(means, 10, 3, b, rng));
  EXPECT_EQ(out.scores, (std::vector<double>{1, 1, 1}));
  EXPECT_FALSE(PeelingTopK(means, 10, 4, b, rng).ok());
}

TEST(PeelingTest, SeparatedMeansAreFound) {
  std::vector<double> means(16, 0.0);
  for (size_t j = 0; j < 4; ++j) means[3 * j + 1] = 1.0;
  ASSERT_OK_AND_ASSIGN(PrivacyBudget b, PrivacyBudget::ForPeeling(1, 1e-6, 4));
  Rng rng = MakeStream(5, 0);
  std::vector<double> errs;
  for (int t = 0; t < 1000; ++t) {
    ASSERT_OK_AND_ASSIGN(SelectionOutput out,
                         PeelingTopK(means, 500, 4, b, rng));
    ASSERT_TRUE(out.is_indicator);
    ASSERT_EQ(out.l1_norm, 4.0);
    ASSERT_OK_AND_ASSIGN(double e,
                         SelectionErrorFromIndicator(out.scores, means, 4));
    errs.push_back(e);
  }
  EXPECT_LT(EstimateMean(errs).mean, 0.05 * 4);
}

TEST(PeelingTest, RaisedColumnIsUsuallySelected) {
  std::vector<double> means(16, 0.5);
  means[9] = 0.9;
  MechanismParams params{.kind = MechanismKind::kPeeling,
                         .k = 4,
                         .epsilon = 1.0,
                         .delta = 1e-6};
  Rng rng = MakeStream(6, 0);
  std::vector<double> hit;
  for (int t = 0; t < 4000; ++t) {
    ASSERT_OK_AND_ASSIGN(SelectionOutput out,
                         RunMechanism(params, means, 500, rng));
    hit.push_back(out.scores[9]);
  }
  EXPECT_GT(EstimateMean(hit).lower(), 0.5);
}

TEST(ReportNoisyMaxTest, VanishingNoiseEqualsNonPrivate) {
  Rng rng = MakeStream(7, 0);
  ASSERT_OK_AND_ASSIGN(Population pop,
                       SamplePopulation(200, BetaParams::Symmetric(2), rng));
  ASSERT_OK_AND_ASSIGN(Dataset x, SampleDataset(pop, 300, rng));
  ASSERT_OK_AND_ASSIGN(SelectionOutput exact, NonPrivateTopK(x, 7));
  const ColumnMeans means = ComputeColumnMeans(x);
  ASSERT_OK_AND_ASSIGN(SelectionOutput noisy,
                       ReportNoisyMaxTopKWithScale(means.values, 7, 1e-12, rng));
  EXPECT_EQ(noisy.scores, exact.scores);
}

TEST(ReportNoisyMaxTest, KEqualsDIsAllOnes) {
  ASSERT_OK_AND_ASSIGN(Dataset x, Dataset::FromRows({{1, 0, 0}, {0, 1, 0}}));
  Rng rng = MakeStream(8, 0);
  ASSERT_OK_AND_ASSIGN(SelectionOutput out, ReportNoisyMaxTopK(x, 3, 1.0, rng));
  EXPECT_EQ(out.scores, (std::vector<double>{1, 1, 1}));
  EXPECT_FALSE(ReportNoisyMaxTopK(x, 0, 1.0, rng).ok());
}

TEST(ReportNoisyMaxTest, SeparatedMeansAreFound) {
  std::vector<double> means(16, 0.0);
  for (size_t j = 0; j < 4; ++j) means[j * 4] = 1.0;
  MechanismParams params{.kind = MechanismKind::kReportNoisyMax,
                         .k = 4,
                         .epsilon = 1.0};
  Rng rng = MakeStream(9, 0);
  std::vector<double> errs;
  for (int t = 0; t < 1000; ++t) {
    ASSERT_OK_AND_ASSIGN(SelectionOutput out,
                         RunMechanism(params, means, 500, rng));
    ASSERT_OK_AND_ASSIGN(double e,
                         SelectionErrorFromIndicator(out.scores, means, 4));
    errs.push_back(e);
  }
  EXPECT_LT(EstimateMean(errs).mean, 0.05 * 4);
}

TEST(SparseVectorTest, NoiselessProxy) {
  const std::vector<double> means = {0.9, 0.5};
  HypothesisTestSpec spec;
  Rng rng = MakeStream(10, 0);
  ASSERT_OK_AND_ASSIGN(
      SelectionOutput out,
      SparseVectorSelectWithNoise(means, spec, {1e-12, 1e-12}, rng));
  EXPECT_EQ(out.scores, (std::vector<double>{1, 0}));
}

TEST(SparseVectorTest, NoiseScales) {
  HypothesisTestSpec spec;
  spec.k_bound = 4;
  const SvtNoise noise = SvtNoiseFor(spec, 1.0, 100);
  // eps0 = 1/8.
  EXPECT_NEAR(noise.threshold_scale, 16.0 / 100.0, 1e-15);
  EXPECT_NEAR(noise.query_scale, 32.0 / 100.0, 1e-15);
}

TEST(SparseVectorTest, StopsAfterKBoundReports) {
  const std::vector<double> means(10, 0.99);
  HypothesisTestSpec spec;
  spec.k_bound = 3;
  Rng rng = MakeStream(11, 0);
  ASSERT_OK_AND_ASSIGN(
      SelectionOutput out,
      SparseVectorSelectWithNoise(means, spec, {1e-12, 1e-12}, rng));
  EXPECT_EQ(out.SelectedIndices(), (std::vector<size_t>{0, 1, 2}));
}

TEST(SparseVectorTest, HighSignalRegimeMeetsBothAssumptions) {
  // Columns at 0.95 or 0.5, far from the 0.78 midpoint relative to the noise
  // at n = 10^6.
  const size_t d = 256;
  const size_t k = 8;
  std::vector<double> means(d, 0.5);
  for (size_t j = 0; j < k; ++j) means[j * 31] = 0.95;
  MechanismParams params{.kind = MechanismKind::kSparseVector,
                         .k = k,
                         .epsilon = 1.0};
  params.svt.k_bound = static_cast<int>(4 * k);
  Rng rng = MakeStream(12, 0);
  double fp = 0, nulls = 0, tp = 0, signals = 0;
  for (int t = 0; t < 2000; ++t) {
    ASSERT_OK_AND_ASSIGN(SelectionOutput out,
                         RunMechanism(params, means, 1000000, rng));
    for (size_t j = 0; j < d; ++j) {
      if (means[j] > 0.9) {
        signals += 1;
        tp += out.scores[j];
      } else {
        nulls += 1;
        fp += out.scores[j];
      }
    }
  }
  EXPECT_LE(fp / nulls, static_cast<double>(k) / (16.0 * d));
  EXPECT_GE(tp / signals, 1.0 - 1.0 / 16.0);
}

TEST(GaussianMeanTest, StddevFormula) {
  const double sigma = GaussianMeanStddev(400, 4000, 1.0, 1e-6);
  EXPECT_NEAR(sigma,
              std::sqrt(2 * std::log(1.25e6)) * (20.0 / 4000.0), 1e-15);
}

TEST(GaussianMeanTest, LargeNIsAccurateAndClamped) {
  Rng rng = MakeStream(13, 0);
  Population pop{{0.0, 0.3, 0.7, 1.0}, BetaParams::Symmetric(1)};
  ASSERT_OK_AND_ASSIGN(Dataset x, SampleDataset(pop, 1000000, rng));
  const ColumnMeans means = ComputeColumnMeans(x);
  ASSERT_OK_AND_ASSIGN(MeanRelease r, GaussianMeanRelease(x, 1.0, 1e-6, rng));
  for (size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(r.released[j], means.values[j], 0.01);
    EXPECT_GE(r.released[j], 0.0);
    EXPECT_LE(r.released[j], 1.0);
  }
  EXPECT_FALSE(GaussianMeanRelease(x, 1.0, 0.0, rng).ok());
}

TEST(GaussianMeanTest, UnclampedErrorMatchesVariance) {
  Rng rng = MakeStream(14, 0);
  ASSERT_OK_AND_ASSIGN(Population pop,
                       SamplePopulation(400, BetaParams::Symmetric(1), rng));
  const double sigma = GaussianMeanStddev(400, 4000, 1.0, 1e-6);
  std::vector<double> per_trial;
  for (int t = 0; t < 200; ++t) {
    ASSERT_OK_AND_ASSIGN(Dataset x, SampleDataset(pop, 4000, rng));
    const ColumnMeans m = ComputeColumnMeans(x);
    ASSERT_OK_AND_ASSIGN(MeanRelease r, GaussianMeanRelease(x, 1.0, 1e-6, rng));
    double s = 0;
    for (size_t j = 0; j < 400; ++j) {
      s += (r.noisy[j] - m.values[j]) * (r.noisy[j] - m.values[j]);
    }
    per_trial.push_back(s / 400.0);
  }
  EXPECT_TRUE(EstimateMean(per_trial).Covers(sigma * sigma));
}

TEST(BaselinesTest, FirstKAndNonPrivate) {
  ASSERT_OK_AND_ASSIGN(SelectionOutput first, TrivialFirstK(5, 2));
  EXPECT_EQ(first.scores, (std::vector<double>{1, 1, 0, 0, 0}));
  const std::vector<double> worst = {0, 0, 0, 1, 1};
  ASSERT_OK_AND_ASSIGN(double e,
                       SelectionErrorFromIndicator(first.scores, worst, 2));
  EXPECT_EQ(e, 2.0);
  EXPECT_FALSE(TrivialFirstK(5, 6).ok());

  Rng rng = MakeStream(15, 0);
  ASSERT_OK_AND_ASSIGN(Population pop,
                       SamplePopulation(50, BetaParams::Symmetric(2), rng));
  ASSERT_OK_AND_ASSIGN(Dataset x, SampleDataset(pop, 40, rng));
  ASSERT_OK_AND_ASSIGN(SelectionOutput best, NonPrivateTopK(x, 6));
  ASSERT_OK_AND_ASSIGN(
      double e0,
      SelectionErrorFromIndicator(best.scores, ComputeColumnMeans(x).values, 6));
  EXPECT_EQ(e0, 0.0);
}

// Distribution over selected sets, keyed by indicator bits.
std::map<unsigned, double> SetDistribution(const MechanismParams& params,
                                           const std::vector<double>& means,
                                           const std::vector<size_t>& perm,
                                           uint64_t seed) {
  std::vector<double> permuted(means.size());
  for (size_t j = 0; j < means.size(); ++j) permuted[perm[j]] = means[j];
  Rng rng = MakeStream(seed, 0);
  std::map<unsigned, double> dist;
  constexpr int kTrials = 10000;
  for (int t = 0; t < kTrials; ++t) {
    auto out = RunMechanism(params, permuted, 50, rng);
    unsigned key = 0;
    // Map back through the permutation.
    for (size_t j = 0; j < means.size(); ++j) {
      if (out->scores[perm[j]] == 1.0) key |= 1u << j;
    }
    dist[key] += 1.0 / kTrials;
  }
  return dist;
}

TEST(PermutationEquivarianceTest, SelectionDistributionsAgree) {
  const std::vector<double> means = {0.62, 0.5, 0.7, 0.55};
  const std::vector<size_t> identity = {0, 1, 2, 3};
  const std::vector<size_t> perm = {2, 0, 3, 1};
  // The threshold scan is order dependent (shared threshold, report cap), so
  // svt is not expected to be equivariant.
  for (MechanismKind kind :
       {MechanismKind::kPeeling, MechanismKind::kReportNoisyMax,
        MechanismKind::kNonPrivate}) {
    MechanismParams params{.kind = kind, .k = 2, .epsilon = 4.0, .delta = 1e-3};
    params.svt = HypothesisTestSpec{0.68, 0.5, 0.0625, 2};
    auto a = SetDistribution(params, means, identity, 16);
    auto b = SetDistribution(params, means, perm, 17);
    double tv = 0.0;
    for (unsigned key = 0; key < 16; ++key) tv += std::abs(a[key] - b[key]);
    EXPECT_LT(tv / 2.0, 0.05) << MechanismName(kind);
  }
}

TEST(GuaranteeTest, PerMechanism) {
  MechanismParams p{.k = 3, .epsilon = 0.5, .delta = 1e-5};
  p.kind = MechanismKind::kPeeling;
  EXPECT_EQ(GuaranteeOf(p).delta, 1e-5);
  p.kind = MechanismKind::kReportNoisyMax;
  EXPECT_EQ(GuaranteeOf(p).delta, 0.0);
  p.kind = MechanismKind::kFirstK;
  EXPECT_EQ(GuaranteeOf(p).epsilon, 0.0);
  p.kind = MechanismKind::kNonPrivate;
  EXPECT_TRUE(std::isinf(GuaranteeOf(p).epsilon));
  p.kind = MechanismKind::kSparseVector;
  p.svt.k_bound = 12;
  EXPECT_EQ(MaxL1Norm(p, 10), 10.0);
  EXPECT_EQ(MaxL1Norm(p, 100), 12.0);
  p.kind = MechanismKind::kGaussianMean;
  EXPECT_EQ(MaxL1Norm(p, 100), 100.0);
}

}  // namespace
}  // namespace privsel
