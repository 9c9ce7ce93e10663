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

#ifndef PRIVSEL_QUADRATURE_H_
#define PRIVSEL_QUADRATURE_H_

#include <functional>

namespace privsel {

inline constexpr double kQuadratureTolerance = 1e-10;

// Adaptive Simpson integration of `f` over [a, b] to an absolute tolerance.
// The integrand must be finite on the closed interval.
double AdaptiveSimpson(const std::function<double(double)>& f, double a,
                       double b, double abs_tolerance = kQuadratureTolerance,
                       int max_depth = 48);

// Pr[lo <= P <= hi] for P ~ Beta(alpha, beta), computed purely by quadrature
// of the unnormalized density (numerator and normalizer alike) after the
// substitution p = sin^2(theta), which removes the endpoint singularities for
// alpha, beta >= 1/2. Independent of the special-function path in beta.h.
double BetaMassByQuadrature(double alpha, double beta, double lo, double hi);

}  // namespace privsel

#endif  // PRIVSEL_QUADRATURE_H_
