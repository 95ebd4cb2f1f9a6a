// cosgauss/features.hpp
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
#include <cstddef>

#include "cosgauss/common.hpp"

namespace cosgauss {

namespace featdetail {

// Regression delta of one row with window W, edges replicated:
//   d[t] = sum_k k (x[min(t+k, T-1)] - x[max(t-k, 0)]) / (2 sum_k k^2)
inline void delta_row(const double* x, double* out, std::size_t T, int W) {
  double denom = 0.0;
  for (int k = 1; k <= W; ++k) denom += static_cast<double>(k) * k;
  denom *= 2.0;
  for (std::size_t t = 0; t < T; ++t) {
    double acc = 0.0;
    for (int k = 1; k <= W; ++k) {
      std::size_t hi = t + static_cast<std::size_t>(k);
      if (hi >= T) hi = T - 1;
      std::size_t lo = t >= static_cast<std::size_t>(k)
                           ? t - static_cast<std::size_t>(k)
                           : 0;
      acc += static_cast<double>(k) * (x[hi] - x[lo]);
    }
    out[t] = acc / denom;
  }
}

// Transpose of delta_row: scatters the output gradient back onto the
// (clamped) source frames.
inline void delta_row_transpose(const double* dout, double* dx, std::size_t T,
                                int W) {
  double denom = 0.0;
  for (int k = 1; k <= W; ++k) denom += static_cast<double>(k) * k;
  denom *= 2.0;
  for (std::size_t t = 0; t < T; ++t) dx[t] = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (int k = 1; k <= W; ++k) {
      std::size_t hi = t + static_cast<std::size_t>(k);
      if (hi >= T) hi = T - 1;
      std::size_t lo = t >= static_cast<std::size_t>(k)
                           ? t - static_cast<std::size_t>(k)
                           : 0;
      const double w = static_cast<double>(k) / denom * dout[t];
      dx[hi] += w;
      dx[lo] -= w;
    }
  }
}

}  // namespace featdetail

// Stacks [J; delta(J); delta(delta(J))] into a 3F x T matrix.
inline Matrix delta_features(const Matrix& J, int window) {
  check_arg(window >= 1, "delta_features: window must be >= 1");
  check_arg(J.cols >= 1, "delta_features: empty input");
  const std::size_t F = J.rows, T = J.cols;
  Matrix X(3 * F, T);
  for (std::size_t i = 0; i < F; ++i) {
    const double* src = J.row(i);
    double* d0 = X.row(i);
    double* d1 = X.row(F + i);
    double* d2 = X.row(2 * F + i);
    std::copy(src, src + T, d0);
    featdetail::delta_row(src, d1, T, window);
    featdetail::delta_row(d1, d2, T, window);
  }
  return X;
}

// d loss / d J given d loss / d [J; delta; double-delta].
inline Matrix delta_features_backward(const Matrix& dX, std::size_t F,
                                      int window) {
  const std::size_t T = dX.cols;
  check_arg(dX.rows == 3 * F, "delta_features_backward: shape mismatch");
  Matrix dJ(F, T);
  Vec tmp(T), tmp2(T);
  for (std::size_t i = 0; i < F; ++i) {
    double* out = dJ.row(i);
    std::copy(dX.row(i), dX.row(i) + T, out);
    featdetail::delta_row_transpose(dX.row(F + i), tmp.data(), T, window);
    for (std::size_t t = 0; t < T; ++t) out[t] += tmp[t];
    featdetail::delta_row_transpose(dX.row(2 * F + i), tmp.data(), T, window);
    featdetail::delta_row_transpose(tmp.data(), tmp2.data(), T, window);
    for (std::size_t t = 0; t < T; ++t) out[t] += tmp2[t];
  }
  return dJ;
}

// Per-recording, per-dimension z-score. Rows with (population) std below the
// 1e-8 floor divide by the floor, which zeroes constant rows.
struct NormalizeCache {
  Matrix z;      // normalized output
  Vec std_eff;   // per-row effective divisor
  Vec std_raw;   // per-row raw std, to gate the std path in backward
};

inline constexpr double kStdFloor = 1e-8;

inline Matrix normalize_features(const Matrix& X, NormalizeCache* cache = nullptr) {
  check_arg(X.cols >= 2, "normalize_features: needs T >= 2");
  const std::size_t R = X.rows, T = X.cols;
  Matrix Z(R, T);
  Vec std_eff(R), std_raw(R);
  for (std::size_t r = 0; r < R; ++r) {
    const double* x = X.row(r);
    double mean = 0.0;
    for (std::size_t t = 0; t < T; ++t) mean += x[t];
    mean /= static_cast<double>(T);
    double var = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double c = x[t] - mean;
      var += c * c;
    }
    var /= static_cast<double>(T);
    const double sd = std::sqrt(var);
    const double eff = sd > kStdFloor ? sd : kStdFloor;
    std_raw[r] = sd;
    std_eff[r] = eff;
    double* z = Z.row(r);
    for (std::size_t t = 0; t < T; ++t) z[t] = (x[t] - mean) / eff;
  }
  if (cache) {
    cache->z = Z;
    cache->std_eff = std_eff;
    cache->std_raw = std_raw;
  }
  return Z;
}

inline Matrix normalize_features_backward(const Matrix& dZ,
                                          const NormalizeCache& cache) {
  const std::size_t R = dZ.rows, T = dZ.cols;
  check_arg(cache.z.rows == R && cache.z.cols == T,
            "normalize_features_backward: shape mismatch");
  Matrix dX(R, T);
  for (std::size_t r = 0; r < R; ++r) {
    const double* dz = dZ.row(r);
    const double* z = cache.z.row(r);
    const double eff = cache.std_eff[r];
    double sum_dz = 0.0, sum_dzz = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      sum_dz += dz[t];
      sum_dzz += dz[t] * z[t];
    }
    // When std is floored the divisor is a constant and its path vanishes.
    const bool live_std = cache.std_raw[r] > kStdFloor;
    double* dx = dX.row(r);
    for (std::size_t t = 0; t < T; ++t) {
      double g = dz[t] - sum_dz / static_cast<double>(T);
      if (live_std) g -= z[t] * sum_dzz / static_cast<double>(T);
      dx[t] = g / eff;
    }
  }
  return dX;
}

}  // namespace cosgauss
