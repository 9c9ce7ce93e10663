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

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "privsel/parallel.h"
#include "privsel/quadrature.h"
#include "privsel/random.h"
#include "privsel/stats.h"

namespace privsel {
namespace {

TEST(RandomTest, StreamsAreReproducibleAndDistinct) {
  Rng a = MakeStream(42, 3);
  Rng b = MakeStream(42, 3);
  Rng c = MakeStream(42, 4);
  Rng d = MakeStream(43, 3);
  const uint64_t first = a();
  EXPECT_EQ(first, b());
  EXPECT_NE(first, c());
  EXPECT_NE(first, d());
}

TEST(RandomTest, DerivedSeedsDoNotCollideOnSmallGrid) {
  std::set<uint64_t> seen;
  for (uint64_t m = 0; m < 64; ++m) {
    for (uint64_t t = 0; t < 256; ++t) seen.insert(DeriveStreamSeed(m, t));
  }
  EXPECT_EQ(seen.size(), 64u * 256u);
}

TEST(RandomTest, UniformOpenIntervalNeverHitsEndpoints) {
  Rng rng = MakeStream(1, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = UniformOpen01(rng);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RandomTest, LaplaceMomentsWithinThreeSigma) {
  Rng rng = MakeStream(2, 0);
  constexpr int kDraws = 400000;
  const double scale = 0.7;
  std::vector<double> draws(kDraws), abs_draws(kDraws);
  for (int i = 0; i < kDraws; ++i) {
    draws[i] = SampleLaplace(scale, rng);
    abs_draws[i] = std::abs(draws[i]);
  }
  EXPECT_TRUE(EstimateMean(draws).Covers(0.0));
  // |Laplace(b)| is exponential with mean b.
  EXPECT_TRUE(EstimateMean(abs_draws).Covers(scale));
  EXPECT_EQ(SampleLaplace(0.0, rng), 0.0);
}

TEST(RandomTest, GumbelMeanIsEulerGamma) {
  Rng rng = MakeStream(3, 0);
  std::vector<double> draws(400000);
  for (double& g : draws) g = SampleStandardGumbel(rng);
  EXPECT_TRUE(EstimateMean(draws).Covers(0.57721566490153286));
}

TEST(RandomTest, BernoulliEdgesAndRate) {
  Rng rng = MakeStream(4, 0);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_FALSE(SampleBernoulli(0.0, rng));
    ASSERT_TRUE(SampleBernoulli(1.0, rng));
    ASSERT_FALSE(SampleBernoulli(-0.5, rng));
    ASSERT_TRUE(SampleBernoulli(1.5, rng));
  }
  std::vector<double> draws(200000);
  for (double& x : draws) x = SampleBernoulli(0.3, rng) ? 1.0 : 0.0;
  EXPECT_TRUE(EstimateMean(draws).Covers(0.3));
}

TEST(StatsTest, CompensatedSumRecoversLostBits) {
  CompensatedSum s;
  s.Add(1e16);
  for (int i = 0; i < 1000; ++i) s.Add(1.0);
  s.Add(-1e16);
  EXPECT_EQ(s.Total(), 1000.0);
}

TEST(StatsTest, SumIsOrderIndependentHere) {
  std::vector<double> v;
  for (int i = 1; i <= 10000; ++i) v.push_back(1.0 / i);
  const double forward = Sum(v);
  std::reverse(v.begin(), v.end());
  EXPECT_EQ(forward, Sum(v));
}

TEST(StatsTest, MeanEstimate) {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const MeanEstimate m = EstimateMean(v);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  // Unbiased variance 5/3, standard error sqrt(5/12).
  EXPECT_NEAR(m.std_error, std::sqrt(5.0 / 12.0), 1e-15);
  EXPECT_NEAR(m.ci_halfwidth, kConfidenceSigmas * m.std_error, 1e-15);
  EXPECT_EQ(m.count, 4u);
  EXPECT_TRUE(m.Covers(2.5));
  EXPECT_FALSE(m.Covers(100.0));

  const std::vector<double> one = {7.0};
  EXPECT_EQ(EstimateMean(one).ci_halfwidth, 0.0);
}

TEST(StatsTest, KolmogorovSmirnovOnExactQuantiles) {
  // Midpoint quantiles of the uniform distribution give D = 1/(2N).
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back((i + 0.5) / 100.0);
  EXPECT_NEAR(KolmogorovSmirnovDistance(v, [](double x) { return x; }), 0.005,
              1e-15);
}

TEST(QuadratureTest, PolynomialIsExact) {
  const double v =
      AdaptiveSimpson([](double x) { return x * x * x - 2 * x; }, 0.0, 2.0,
                      kQuadratureTolerance);
  EXPECT_NEAR(v, 0.0, 1e-13);
}

TEST(QuadratureTest, SmoothIntegrand) {
  const double v = AdaptiveSimpson([](double x) { return std::exp(-x * x); },
                                   0.0, 3.0, 1e-13);
  EXPECT_NEAR(v, 0.88620734825952123, 1e-12);
}

TEST(QuadratureTest, BetaMassHandlesSingularShapes) {
  // Arcsine law: Pr[P <= 0.3] = (2/pi) asin(sqrt(0.3)).
  EXPECT_NEAR(BetaMassByQuadrature(0.5, 0.5, 0.0, 0.3),
              2.0 / M_PI * std::asin(std::sqrt(0.3)), 1e-12);
  EXPECT_NEAR(BetaMassByQuadrature(0.5, 5.0, 0.0, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(BetaMassByQuadrature(2.0, 2.0, 0.25, 0.75), 0.6875, 1e-12);
}

TEST(ParallelForTest, VisitsEveryIndexOnce) {
  for (int threads : {1, 3, 8}) {
    std::vector<int> hits(1000, 0);
    ParallelFor(1000, threads, [&](int64_t t) { ++hits[t]; });
    EXPECT_TRUE(std::all_of(hits.begin(), hits.end(),
                            [](int h) { return h == 1; }));
  }
  int calls = 0;
  ParallelFor(0, 4, [&](int64_t) { ++calls; });
  EXPECT_EQ(calls, 0);
}

}  // namespace
}  // namespace privsel
