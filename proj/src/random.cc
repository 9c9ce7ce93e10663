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

#include "privsel/random.h"

#include <cmath>
#include <limits>

namespace privsel {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t DeriveStreamSeed(uint64_t master_seed, uint64_t stream_index) {
  // Two rounds so that neighbouring (seed, index) pairs land far apart.
  return SplitMix64(SplitMix64(master_seed) ^
                    SplitMix64(stream_index + 0x632be59bd9b4e019ULL));
}

Rng MakeStream(uint64_t master_seed, uint64_t stream_index) {
  return Rng(DeriveStreamSeed(master_seed, stream_index));
}

double UniformOpen01(Rng& rng) {
  // (k + 0.5) / 2^53 for k in [0, 2^53) never hits either endpoint.
  const uint64_t k = rng() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double SampleLaplace(double scale, Rng& rng) {
  if (scale == 0.0) return 0.0;
  const double u = UniformOpen01(rng) - 0.5;
  return u < 0 ? scale * std::log1p(2.0 * u) : -scale * std::log1p(-2.0 * u);
}

double SampleStandardGumbel(Rng& rng) {
  return -std::log(-std::log(UniformOpen01(rng)));
}

double SampleGaussian(double stddev, Rng& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  return normal(rng);
}

bool SampleBernoulli(double p, Rng& rng) {
  if (!(p > 0.0)) return false;
  if (p >= 1.0) return true;
  // p * 2^64 fits in a double with 53 bits of precision, which is all p has.
  const uint64_t threshold = static_cast<uint64_t>(std::ldexp(p, 64));
  return rng() < threshold;
}

}  // namespace privsel
