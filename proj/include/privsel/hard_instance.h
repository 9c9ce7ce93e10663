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

#ifndef PRIVSEL_HARD_INSTANCE_H_
#define PRIVSEL_HARD_INSTANCE_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "privsel/beta.h"
#include "privsel/random.h"

namespace privsel {

// Column means P in [0,1]^d together with the prior they were drawn from.
struct Population {
  std::vector<double> means;
  BetaParams prior;

  size_t d() const { return means.size(); }
};

// An n x d binary matrix. Rows are individuals, columns are items. Storage is
// bit-packed and column-major so that column sums are popcounts.
class Dataset {
 public:
  // All-zero dataset. Requires n >= 1 and d >= 1.
  static absl::StatusOr<Dataset> Zeros(size_t n, size_t d);
  // rows[i][j] must be 0 or 1 and every row must have the same length.
  static absl::StatusOr<Dataset> FromRows(
      const std::vector<std::vector<uint8_t>>& rows);

  size_t n() const { return n_; }
  size_t d() const { return d_; }

  bool Get(size_t i, size_t j) const {
    return (columns_[j * words_per_column_ + i / 64] >> (i % 64)) & 1u;
  }
  void Set(size_t i, size_t j, bool bit);

  // Number of ones in column j.
  uint64_t ColumnSum(size_t j) const;
  std::vector<uint8_t> Row(size_t i) const;

  // Packed words of column j; bit i%64 of word i/64 is entry (i, j). Padding
  // bits past n are always zero.
  std::span<const uint64_t> ColumnWords(size_t j) const {
    return {columns_.data() + j * words_per_column_, words_per_column_};
  }
  std::span<uint64_t> MutableColumnWords(size_t j) {
    return {columns_.data() + j * words_per_column_, words_per_column_};
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  Dataset(size_t n, size_t d);

  size_t n_ = 0;
  size_t d_ = 0;
  size_t words_per_column_ = 0;
  std::vector<uint64_t> columns_;
};

// The empirical means (1/n) sum_i X_i^j.
struct ColumnMeans {
  std::vector<double> values;
};

ColumnMeans ComputeColumnMeans(const Dataset& x);

// d i.i.d. draws from `prior`.
absl::StatusOr<Population> SamplePopulation(size_t d, const BetaParams& prior,
                                            Rng& rng);

// n rows with independent entries X_i^j ~ Bernoulli(P^j).
absl::StatusOr<Dataset> SampleDataset(const Population& pop, size_t n,
                                      Rng& rng);

// One fresh row drawn from the population, as 0/1 bytes.
std::vector<uint8_t> SampleRow(const Population& pop, Rng& rng);

// A copy of x with row i (0-based) replaced by a fresh draw from pop.
absl::StatusOr<Dataset> ResampleRow(const Dataset& x, size_t i,
                                    const Population& pop, Rng& rng);

// Indices of the k largest values, ties broken toward the smaller index.
// Returned in increasing index order.
absl::StatusOr<std::vector<size_t>> TopKSet(std::span<const double> values,
                                            size_t k);

// Which means an accuracy figure is measured against.
enum class AccuracyReference { kPopulation, kEmpirical };

std::string_view AccuracyReferenceName(AccuracyReference ref);
absl::StatusOr<AccuracyReference> ParseAccuracyReference(std::string_view name);

// max_{|s|=k} sum_{j in s} reference^j - sum_{j in selected} reference^j.
// `selected` must hold exactly k distinct in-range indices.
absl::StatusOr<double> SelectionError(std::span<const size_t> selected,
                                      std::span<const double> reference,
                                      size_t k);

// Same, for a 0/1 indicator vector with exactly k ones.
absl::StatusOr<double> SelectionErrorFromIndicator(
    std::span<const double> indicator, std::span<const double> reference,
    size_t k);

// Replay container. Layout, all little-endian:
//   "PSL1" | u32 n | u32 d | ceil(n*d/8) bytes of row-major bits, bit r*d+c
//   at byte (r*d+c)/8, position (r*d+c)%8
// optionally followed by a population section
//   u32 d | d x f64 means
// The prior is not stored.
absl::Status WriteReplay(std::ostream& out, const Dataset& x,
                         const Population* pop);

struct Replay {
  Dataset dataset;
  std::optional<Population> population;
};

// `prior` is attached to the population section, if present.
absl::StatusOr<Replay> ReadReplay(std::istream& in, const BetaParams& prior);

}  // namespace privsel

#endif  // PRIVSEL_HARD_INSTANCE_H_
