// cosgauss/gradcheck.hpp
//
// Copyright 2026 The cosgauss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "cosgauss/common.hpp"

namespace cosgauss {

// Central finite differences (f(p+h) - f(p-h)) / 2h against an analytic
// gradient; returns the worst relative error, with an absolute floor of 1e-8
// in the denominator so near-zero gradients do not blow up the ratio.
inline double grad_check(const std::function<double(const Vec&)>& f,
                         const Vec& params, const Vec& analytic, double h) {
  check_arg(params.size() == analytic.size(), "grad_check: size mismatch");
  check_arg(h > 0.0, "grad_check: h must be positive");
  double worst = 0.0;
  Vec p = params;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double saved = p[k];
    p[k] = saved + h;
    const double fp = f(p);
    p[k] = saved - h;
    const double fm = f(p);
    p[k] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      fail("grad_check: non-finite function value");
    const double fd = (fp - fm) / (2.0 * h);
    const double denom =
        std::max({1e-8, std::abs(fd), std::abs(analytic[k])});
    worst = std::max(worst, std::abs(fd - analytic[k]) / denom);
  }
  return worst;
}

}  // namespace cosgauss
