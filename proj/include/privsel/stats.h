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

#ifndef PRIVSEL_STATS_H_
#define PRIVSEL_STATS_H_

#include <cstddef>
#include <span>

namespace privsel {

// Width multiplier for every confidence interval the library reports.
inline constexpr double kConfidenceSigmas = 3.0;

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void Add(double value);
  double Total() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double Sum(std::span<const double> values);

// Sample mean with a normal-approximation interval of kConfidenceSigmas
// standard errors.
struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_halfwidth = 0.0;
  size_t count = 0;

  double lower() const { return mean - ci_halfwidth; }
  double upper() const { return mean + ci_halfwidth; }
  // True when the interval contains `value`.
  bool Covers(double value) const {
    return lower() <= value && value <= upper();
  }

  friend bool operator==(const MeanEstimate&, const MeanEstimate&) = default;
};

// Uses the unbiased sample variance. A single sample gets a zero-width
// interval.
MeanEstimate EstimateMean(std::span<const double> values);

// Two-sided Kolmogorov-Smirnov statistic of `sorted_samples` against a CDF.
template <typename Cdf>
double KolmogorovSmirnovDistance(std::span<const double> sorted_samples,
                                 Cdf&& cdf) {
  const double n = static_cast<double>(sorted_samples.size());
  double worst = 0.0;
  for (size_t i = 0; i < sorted_samples.size(); ++i) {
    const double f = cdf(sorted_samples[i]);
    const double above = (static_cast<double>(i) + 1.0) / n - f;
    const double below = f - static_cast<double>(i) / n;
    if (above > worst) worst = above;
    if (below > worst) worst = below;
  }
  return worst;
}

}  // namespace privsel

#endif  // PRIVSEL_STATS_H_
