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

#ifndef PRIVSEL_VERIFY_H_
#define PRIVSEL_VERIFY_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "privsel/experiment.h"
#include "privsel/mechanisms.h"
#include "privsel/stats.h"

namespace privsel {

// Outcome of one invariant check. `value` is the worst observed statistic and
// `limit` what it was compared against.
struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
  double seconds = 0.0;
};

CheckResult CheckPdfNormalization();
CheckResult CheckCdfMonotone();
CheckResult CheckCdfSymmetry();
CheckResult CheckCdfAgainstQuadrature();
CheckResult CheckTailBoundGrid();
CheckResult CheckSamplerKolmogorovSmirnov(uint64_t seed);
CheckResult CheckFingerprintingIdentity(uint64_t seed);
CheckResult CheckBetaFingerprinting(uint64_t seed);
CheckResult CheckExpMechPrivacyRatio();

struct PerColumnOptions {
  MechanismKind mechanism = MechanismKind::kReportNoisyMax;
  size_t d = 64;
  size_t k = 4;
  size_t n = 200;
  double beta_sym = 2.0;
  double epsilon = 1.0;
  double delta = 1e-6;
  int64_t trials = kDefaultEqualityTrials;
  uint64_t master_seed = 1;
  int threads = 0;
};

// Per column j: trial means of Z^j and of 2 beta M^j (P^j - 1/2), and the
// paired difference with its 3 sigma interval.
struct PerColumnEquality {
  std::vector<MeanEstimate> z;
  std::vector<MeanEstimate> proxy;
  std::vector<MeanEstimate> difference;
  size_t agreeing = 0;
};

absl::StatusOr<PerColumnEquality> MeasurePerColumnEquality(
    const PerColumnOptions& options);
CheckResult CheckPerColumnEquality(const PerColumnOptions& options,
                                   size_t max_disagreeing);

struct VerifyOptions {
  uint64_t master_seed = 1;
  int threads = 0;
  int64_t equality_trials = kDefaultEqualityTrials;
};

std::vector<CheckResult> RunVerificationSuite(const VerifyOptions& options);
bool AllPassed(const std::vector<CheckResult>& results);
// {"passed": bool, "checks": [{name, passed, value, limit, detail, seconds}]}
void WriteVerificationJson(std::ostream& out,
                           const std::vector<CheckResult>& results);

}  // namespace privsel

#endif  // PRIVSEL_VERIFY_H_
