// cosgauss/fft.hpp
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

#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "cosgauss/common.hpp"

namespace cosgauss {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey. n must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  check_arg(is_pow2(n), "fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> t = w * a[i + k + len / 2];
        a[i + k] = u + t;
        a[i + k + len / 2] = u - t;
        w *= wl;
      }
    }
  }
}

// |DFT| of a real signal zero-padded to n_fft, bins 0..n_fft/2 (inclusive).
// Uses the radix-2 FFT when n_fft is a power of two, a direct DFT otherwise.
inline Vec magnitude_spectrum(std::span<const double> x, std::size_t n_fft) {
  check_arg(n_fft >= x.size(), "magnitude_spectrum: n_fft < signal length");
  const std::size_t half = n_fft / 2;
  Vec mag(half + 1, 0.0);
  if (is_pow2(n_fft)) {
    std::vector<std::complex<double>> a(n_fft, {0.0, 0.0});
    for (std::size_t i = 0; i < x.size(); ++i) a[i] = {x[i], 0.0};
    fft_inplace(a);
    for (std::size_t k = 0; k <= half; ++k) mag[k] = std::abs(a[k]);
  } else {
    for (std::size_t k = 0; k <= half; ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double ang = -2.0 * std::numbers::pi * static_cast<double>(k) *
                     static_cast<double>(i) / static_cast<double>(n_fft);
        re += x[i] * std::cos(ang);
        im += x[i] * std::sin(ang);
      }
      mag[k] = std::hypot(re, im);
    }
  }
  return mag;
}

}  // namespace cosgauss
