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

#include "privsel/stats.h"

#include <cmath>

namespace privsel {

void CompensatedSum::Add(double value) {
  const double t = sum_ + value;
  if (std::abs(sum_) >= std::abs(value)) {
    compensation_ += (sum_ - t) + value;
  } else {
    compensation_ += (value - t) + sum_;
  }
  sum_ = t;
}

double Sum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc.Add(v);
  return acc.Total();
}

MeanEstimate EstimateMean(std::span<const double> values) {
  MeanEstimate out;
  out.count = values.size();
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = Sum(values) / n;
  if (values.size() < 2) return out;
  CompensatedSum squares;
  for (double v : values) {
    const double dev = v - out.mean;
    squares.Add(dev * dev);
  }
  const double variance = squares.Total() / (n - 1.0);
  out.std_error = std::sqrt(variance / n);
  out.ci_halfwidth = kConfidenceSigmas * out.std_error;
  return out;
}

}  // namespace privsel
