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

#include "privsel/hard_instance.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "absl/strings/str_cat.h"

namespace privsel {
namespace {

constexpr char kReplayMagic[4] = {'P', 'S', 'L', '1'};

// Threshold t such that Pr[u64 < t] = p for a uniform 64-bit word.
uint64_t BernoulliThreshold(double p) {
  if (!(p > 0.0)) return 0;
  if (p >= 1.0) return std::numeric_limits<uint64_t>::max();
  return static_cast<uint64_t>(std::ldexp(p, 64));
}

void FillColumn(std::span<uint64_t> words, size_t n, double p, Rng& rng) {
  std::fill(words.begin(), words.end(), 0);
  if (!(p > 0.0)) return;
  if (p >= 1.0) {
    for (size_t i = 0; i < n; ++i) words[i / 64] |= uint64_t{1} << (i % 64);
    return;
  }
  const uint64_t threshold = BernoulliThreshold(p);
  for (size_t i = 0; i < n; ++i) {
    if (rng() < threshold) words[i / 64] |= uint64_t{1} << (i % 64);
  }
}

void PutU32(std::ostream& out, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

bool GetU32(std::istream& in, uint32_t& v) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return true;
}

void PutF64(std::ostream& out, double x) {
  const uint64_t bits = std::bit_cast<uint64_t>(x);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

bool GetF64(std::istream& in, double& x) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) return false;
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
  x = std::bit_cast<double>(bits);
  return true;
}

}  // namespace

Dataset::Dataset(size_t n, size_t d)
    : n_(n), d_(d), words_per_column_((n + 63) / 64),
      columns_(words_per_column_ * d, 0) {}

absl::StatusOr<Dataset> Dataset::Zeros(size_t n, size_t d) {
  if (n < 1 || d < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("Dataset needs n >= 1 and d >= 1, got n = ", n,
                     ", d = ", d));
  }
  return Dataset(n, d);
}

absl::StatusOr<Dataset> Dataset::FromRows(
    const std::vector<std::vector<uint8_t>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    return absl::InvalidArgumentError("Dataset needs at least one row and column");
  }
  const size_t d = rows.front().size();
  Dataset x(rows.size(), d);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      return absl::InvalidArgumentError(absl::StrCat(
          "Row ", i, " has length ", rows[i].size(), ", expected ", d));
    }
    for (size_t j = 0; j < d; ++j) {
      if (rows[i][j] > 1) {
        return absl::InvalidArgumentError(absl::StrCat(
            "Entry (", i, ", ", j, ") is ", int{rows[i][j]}, ", not 0 or 1"));
      }
      x.Set(i, j, rows[i][j] == 1);
    }
  }
  return x;
}

void Dataset::Set(size_t i, size_t j, bool bit) {
  uint64_t& word = columns_[j * words_per_column_ + i / 64];
  const uint64_t mask = uint64_t{1} << (i % 64);
  word = bit ? (word | mask) : (word & ~mask);
}

uint64_t Dataset::ColumnSum(size_t j) const {
  uint64_t total = 0;
  for (uint64_t w : ColumnWords(j)) total += std::popcount(w);
  return total;
}

std::vector<uint8_t> Dataset::Row(size_t i) const {
  std::vector<uint8_t> row(d_);
  for (size_t j = 0; j < d_; ++j) row[j] = Get(i, j) ? 1 : 0;
  return row;
}

ColumnMeans ComputeColumnMeans(const Dataset& x) {
  ColumnMeans means;
  means.values.resize(x.d());
  const double n = static_cast<double>(x.n());
  for (size_t j = 0; j < x.d(); ++j) {
    means.values[j] = static_cast<double>(x.ColumnSum(j)) / n;
  }
  return means;
}

absl::StatusOr<Population> SamplePopulation(size_t d, const BetaParams& prior,
                                            Rng& rng) {
  if (absl::Status s = ValidateBetaParams(prior); !s.ok()) return s;
  if (d < 1) {
    return absl::InvalidArgumentError("Population needs d >= 1");
  }
  Population pop;
  pop.prior = prior;
  pop.means.resize(d);
  for (double& p : pop.means) p = SampleBeta(prior, rng);
  return pop;
}

absl::StatusOr<Dataset> SampleDataset(const Population& pop, size_t n,
                                      Rng& rng) {
  absl::StatusOr<Dataset> x = Dataset::Zeros(n, pop.d());
  if (!x.ok()) return x.status();
  for (size_t j = 0; j < pop.d(); ++j) {
    FillColumn(x->MutableColumnWords(j), n, pop.means[j], rng);
  }
  return x;
}

std::vector<uint8_t> SampleRow(const Population& pop, Rng& rng) {
  std::vector<uint8_t> row(pop.d());
  for (size_t j = 0; j < pop.d(); ++j) {
    row[j] = SampleBernoulli(pop.means[j], rng) ? 1 : 0;
  }
  return row;
}

absl::StatusOr<Dataset> ResampleRow(const Dataset& x, size_t i,
                                    const Population& pop, Rng& rng) {
  if (i >= x.n()) {
    return absl::OutOfRangeError(
        absl::StrCat("Row index ", i, " out of range for n = ", x.n()));
  }
  if (pop.d() != x.d()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Population has d = ", pop.d(), " but dataset has d = ", x.d()));
  }
  Dataset out = x;
  const std::vector<uint8_t> row = SampleRow(pop, rng);
  for (size_t j = 0; j < x.d(); ++j) out.Set(i, j, row[j] == 1);
  return out;
}

absl::StatusOr<std::vector<size_t>> TopKSet(std::span<const double> values,
                                            size_t k) {
  if (k < 1 || k > values.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "k must lie in [1, ", values.size(), "], got ", k));
  }
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), size_t{0});
  auto before = [&values](size_t a, size_t b) {
    return values[a] > values[b] || (values[a] == values[b] && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), before);
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

std::string_view AccuracyReferenceName(AccuracyReference ref) {
  return ref == AccuracyReference::kPopulation ? "population" : "empirical";
}

absl::StatusOr<AccuracyReference> ParseAccuracyReference(
    std::string_view name) {
  if (name == "population") return AccuracyReference::kPopulation;
  if (name == "empirical") return AccuracyReference::kEmpirical;
  return absl::InvalidArgumentError(absl::StrCat(
      "Unknown accuracy reference '", std::string(name),
      "', expected 'population' or 'empirical'"));
}

absl::StatusOr<double> SelectionError(std::span<const size_t> selected,
                                      std::span<const double> reference,
                                      size_t k) {
  if (selected.size() != k) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Selection has ", selected.size(), " entries, expected k = ", k));
  }
  std::vector<bool> seen(reference.size(), false);
  double chosen = 0.0;
  for (size_t j : selected) {
    if (j >= reference.size() || seen[j]) {
      return absl::InvalidArgumentError(
          absl::StrCat("Selection index ", j, " is out of range or repeated"));
    }
    seen[j] = true;
    chosen += reference[j];
  }
  absl::StatusOr<std::vector<size_t>> best = TopKSet(reference, k);
  if (!best.ok()) return best.status();
  double optimum = 0.0;
  for (size_t j : *best) optimum += reference[j];
  return std::max(0.0, optimum - chosen);
}

absl::StatusOr<double> SelectionErrorFromIndicator(
    std::span<const double> indicator, std::span<const double> reference,
    size_t k) {
  if (indicator.size() != reference.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Indicator length ", indicator.size(), " does not match reference length ",
        reference.size()));
  }
  std::vector<size_t> selected;
  for (size_t j = 0; j < indicator.size(); ++j) {
    if (indicator[j] == 1.0) {
      selected.push_back(j);
    } else if (indicator[j] != 0.0) {
      return absl::InvalidArgumentError(
          absl::StrCat("Entry ", j, " of the indicator is ", indicator[j]));
    }
  }
  return SelectionError(selected, reference, k);
}

absl::Status WriteReplay(std::ostream& out, const Dataset& x,
                         const Population* pop) {
  if (x.n() > std::numeric_limits<uint32_t>::max() ||
      x.d() > std::numeric_limits<uint32_t>::max()) {
    return absl::OutOfRangeError("Dataset dimensions exceed u32");
  }
  out.write(kReplayMagic, sizeof(kReplayMagic));
  PutU32(out, static_cast<uint32_t>(x.n()));
  PutU32(out, static_cast<uint32_t>(x.d()));
  const size_t total_bits = x.n() * x.d();
  std::vector<unsigned char> bytes((total_bits + 7) / 8, 0);
  for (size_t i = 0; i < x.n(); ++i) {
    for (size_t j = 0; j < x.d(); ++j) {
      if (x.Get(i, j)) {
        const size_t bit = i * x.d() + j;
        bytes[bit / 8] |= static_cast<unsigned char>(1u << (bit % 8));
      }
    }
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (pop != nullptr) {
    if (pop->d() != x.d()) {
      return absl::InvalidArgumentError("Population and dataset widths differ");
    }
    PutU32(out, static_cast<uint32_t>(pop->d()));
    for (double p : pop->means) PutF64(out, p);
  }
  if (!out) return absl::DataLossError("Failed writing replay stream");
  return absl::OkStatus();
}

absl::StatusOr<Replay> ReadReplay(std::istream& in, const BetaParams& prior) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kReplayMagic, 4) != 0) {
    return absl::DataLossError("Replay stream does not start with PSL1");
  }
  uint32_t n = 0;
  uint32_t d = 0;
  if (!GetU32(in, n) || !GetU32(in, d)) {
    return absl::DataLossError("Replay stream truncated in header");
  }
  absl::StatusOr<Dataset> x = Dataset::Zeros(n, d);
  if (!x.ok()) return x.status();
  const size_t total_bits = size_t{n} * d;
  std::vector<unsigned char> bytes((total_bits + 7) / 8);
  if (!in.read(reinterpret_cast<char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()))) {
    return absl::DataLossError("Replay stream truncated in bit matrix");
  }
  for (size_t bit = 0; bit < total_bits; ++bit) {
    if ((bytes[bit / 8] >> (bit % 8)) & 1u) x->Set(bit / d, bit % d, true);
  }
  Replay replay{*std::move(x), std::nullopt};
  uint32_t pop_d = 0;
  if (!GetU32(in, pop_d)) {
    if (in.eof() && in.gcount() == 0) return replay;
    return absl::DataLossError("Replay stream truncated in population header");
  }
  if (pop_d != d) {
    return absl::DataLossError(absl::StrCat(
        "Population section has d = ", pop_d, ", dataset has d = ", d));
  }
  Population pop;
  pop.prior = prior;
  pop.means.resize(d);
  for (double& p : pop.means) {
    if (!GetF64(in, p)) {
      return absl::DataLossError("Replay stream truncated in population means");
    }
  }
  replay.population = std::move(pop);
  return replay;
}

}  // namespace privsel
