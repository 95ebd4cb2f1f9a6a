// Shared test-only oracles, independent of the library implementations they
// check: a direct O(n^2) DFT, brute-force pairwise AUC, and small random
// data builders.
#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "cosgauss/auc.hpp"
#include "cosgauss/common.hpp"
#include "cosgauss/rng.hpp"

namespace testutil {

// Direct DFT magnitude at bin k of n_fft, for validating the FFT path.
inline double naive_dft_mag(const cosgauss::Vec& x, std::size_t k,
                            std::size_t n_fft) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double ang = -2.0 * std::numbers::pi * static_cast<double>(k) *
                 static_cast<double>(i) / static_cast<double>(n_fft);
    re += x[i] * std::cos(ang);
    im += x[i] * std::sin(ang);
  }
  return std::hypot(re, im);
}

// Pairwise Mann-Whitney count, ties credited one half.
inline double brute_force_auc(const cosgauss::ScoredSet& set) {
  double u = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  for (const auto& p : set) {
    if (p.label != 1) continue;
    ++n_pos;
    for (const auto& n : set) {
      if (n.label != 0) continue;
      if (p.score > n.score)
        u += 1.0;
      else if (p.score == n.score)
        u += 0.5;
    }
  }
  for (const auto& n : set)
    if (n.label == 0) ++n_neg;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline cosgauss::Vec random_vec(std::size_t n, cosgauss::Rng& rng,
                                double lo = -1.0, double hi = 1.0) {
  cosgauss::Vec v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline cosgauss::Matrix random_matrix(std::size_t r, std::size_t c,
                                      cosgauss::Rng& rng, double lo = -1.0,
                                      double hi = 1.0) {
  cosgauss::Matrix m(r, c);
  for (double& x : m.v) x = rng.uniform(lo, hi);
  return m;
}

}  // namespace testutil
