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

#ifndef PRIVSEL_RANDOM_H_
#define PRIVSEL_RANDOM_H_

#include <cstdint>
#include <random>

namespace privsel {

// Every random draw in the library comes from a caller-owned stream of this
// type. Streams are never shared between threads.
using Rng = std::mt19937_64;

// SplitMix64 finalizer. Bijective on 64-bit words.
uint64_t SplitMix64(uint64_t x);

// Seed for the stream with the given index under `master_seed`. Trial t of an
// experiment always uses stream index t, independent of the thread layout.
uint64_t DeriveStreamSeed(uint64_t master_seed, uint64_t stream_index);

Rng MakeStream(uint64_t master_seed, uint64_t stream_index);

// Uniform on the open interval (0, 1), with 53 bits of resolution.
double UniformOpen01(Rng& rng);

// Laplace(0, scale). A zero scale returns exactly 0.
double SampleLaplace(double scale, Rng& rng);

// Standard Gumbel, -log(-log U).
double SampleStandardGumbel(Rng& rng);

// Normal(0, stddev^2).
double SampleGaussian(double stddev, Rng& rng);

// Bernoulli(p) via a single 64-bit comparison. p outside [0,1] is clamped.
bool SampleBernoulli(double p, Rng& rng);

}  // namespace privsel

#endif  // PRIVSEL_RANDOM_H_
