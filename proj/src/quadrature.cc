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

#include "privsel/quadrature.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace privsel {
namespace {

struct Panel {
  double a, b, fa, fm, fb, whole;
};

double Refine(const std::function<double(double)>& f, const Panel& p,
              double tolerance, int depth) {
  const double m = 0.5 * (p.a + p.b);
  const double lm = 0.5 * (p.a + m);
  const double rm = 0.5 * (m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
  const double right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
  const double delta = left + right - p.whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tolerance) {
    return left + right + delta / 15.0;
  }
  return Refine(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * tolerance,
                depth - 1) +
         Refine(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * tolerance,
                depth - 1);
}

}  // namespace

double AdaptiveSimpson(const std::function<double(double)>& f, double a,
                       double b, double abs_tolerance, int max_depth) {
  if (a == b) return 0.0;
  // Seed with a few panels so that narrow features are not stepped over.
  constexpr int kSeedPanels = 8;
  const double h = (b - a) / kSeedPanels;
  double total = 0.0;
  for (int i = 0; i < kSeedPanels; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == kSeedPanels) ? b : lo + h;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
    total += Refine(f, {lo, hi, flo, fm, fhi, whole},
                    abs_tolerance / kSeedPanels, max_depth);
  }
  return total;
}

double BetaMassByQuadrature(double alpha, double beta, double lo, double hi) {
  // d/dtheta of sin^2 is 2 sin cos, so the integrand becomes
  // 2 sin^(2 alpha - 1) cos^(2 beta - 1).
  auto integrand = [alpha, beta](double theta) {
    return 2.0 * std::pow(std::sin(theta), 2.0 * alpha - 1.0) *
           std::pow(std::cos(theta), 2.0 * beta - 1.0);
  };
  auto to_theta = [](double p) {
    return std::asin(std::sqrt(std::clamp(p, 0.0, 1.0)));
  };
  // The normalizer can be as small as ~1e-3 for the shapes we use, so tighten
  // the absolute tolerance to keep the ratio accurate.
  constexpr double kTight = kQuadratureTolerance * 1e-3;
  const double normalizer =
      AdaptiveSimpson(integrand, 0.0, std::numbers::pi / 2.0, kTight);
  const double mass = AdaptiveSimpson(integrand, to_theta(lo), to_theta(hi),
                                      kTight);
  return mass / normalizer;
}

}  // namespace privsel
