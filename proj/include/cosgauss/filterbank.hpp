// cosgauss/filterbank.hpp
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
#include <limits>
#include <numbers>
#include <span>

#include "cosgauss/audio.hpp"
#include "cosgauss/common.hpp"
#include "cosgauss/fft.hpp"

namespace cosgauss {

// Bank of cosine-modulated Gaussian band-pass kernels
//
//   g_i(n) = cos(2 pi mu_i n) * exp(-n^2 mu_i^2 / 2),  |n| <= (L-1)/2.
//
// The center frequencies mu (cycles/sample) are the only learnable
// parameters; the Gaussian width is tied to mu, which makes the bank
// constant-Q. Kernels are truncated without renormalization, so filters with
// L < 10/mu are noticeably leaky.
struct FilterbankParams {
  Vec mu;               // F normalized center frequencies, ascending at init
  int kernel_len = 257; // L, odd
  double mu_min = 0.004;
  double mu_max = 0.45;
  double eps = 1e-10;   // log floor

  std::size_t num_filters() const { return mu.size(); }

  void validate() const {
    check_arg(!mu.empty(), "filterbank: needs at least one filter");
    check_arg(kernel_len >= 1 && kernel_len % 2 == 1,
              "filterbank: kernel_len must be odd and >= 1");
    check_arg(eps > 0.0, "filterbank: eps must be positive");
    check_arg(mu_min > 0.0 && mu_min <= mu_max && mu_max < 0.5,
              "filterbank: need 0 < mu_min <= mu_max < 0.5");
    for (double m : mu)
      check_arg(m >= mu_min && m <= mu_max,
                "filterbank: mu out of [mu_min, mu_max]");
  }

  void clamp_mu() {
    for (double& m : mu) {
      if (m < mu_min) m = mu_min;
      if (m > mu_max) m = mu_max;
    }
  }
};

inline double hz_to_mel(double f) {
  return 2595.0 * std::log10(1.0 + f / 700.0);
}

inline double mel_to_hz(double m) {
  return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

// F centers equally spaced on the mel scale between f_min and f_max
// (endpoints included), returned as normalized frequencies f/sample_rate.
inline Vec init_mel_centers(std::size_t F, double f_min, double f_max,
                            int sample_rate) {
  check_arg(F >= 1, "init_mel_centers: F must be >= 1");
  check_arg(sample_rate > 0, "init_mel_centers: sample_rate must be positive");
  check_arg(0.0 < f_min && f_min < f_max &&
                f_max <= static_cast<double>(sample_rate) / 2.0,
            "init_mel_centers: need 0 < f_min < f_max <= sample_rate/2");
  const double m_lo = hz_to_mel(f_min);
  const double m_hi = hz_to_mel(f_max);
  Vec mu(F);
  if (F == 1) {
    mu[0] = mel_to_hz(0.5 * (m_lo + m_hi)) / sample_rate;
    return mu;
  }
  for (std::size_t k = 0; k < F; ++k) {
    double m = m_lo + (m_hi - m_lo) * static_cast<double>(k) /
                          static_cast<double>(F - 1);
    mu[k] = mel_to_hz(m) / sample_rate;
  }
  // endpoints are exact by contract; the mel roundtrip may be off by an ulp
  mu.front() = f_min / sample_rate;
  mu.back() = f_max / sample_rate;
  return mu;
}

// F x L kernel matrix, column j holding n = j - (L-1)/2. Rows are built for
// n >= 0 and mirrored, so g(n) == g(-n) holds bit-exactly.
inline Matrix build_kernels(const FilterbankParams& p) {
  p.validate();
  const int L = p.kernel_len;
  const int c = (L - 1) / 2;
  Matrix k(p.num_filters(), static_cast<std::size_t>(L));
  for (std::size_t i = 0; i < p.num_filters(); ++i) {
    const double mu = p.mu[i];
    double* row = k.row(i);
    for (int n = 0; n <= c; ++n) {
      double g = std::cos(2.0 * std::numbers::pi * mu * n) *
                 std::exp(-0.5 * static_cast<double>(n) * n * mu * mu);
      row[c + n] = g;
      row[c - n] = g;
    }
  }
  return k;
}

// d g / d mu = [-2 pi n sin(2 pi mu n) - n^2 mu cos(2 pi mu n)]
//              * exp(-n^2 mu^2 / 2),
// an even function of n, mirrored like the kernels themselves.
inline Matrix kernel_grad_mu(const FilterbankParams& p) {
  p.validate();
  const int L = p.kernel_len;
  const int c = (L - 1) / 2;
  Matrix k(p.num_filters(), static_cast<std::size_t>(L));
  for (std::size_t i = 0; i < p.num_filters(); ++i) {
    const double mu = p.mu[i];
    double* row = k.row(i);
    for (int n = 0; n <= c; ++n) {
      double ang = 2.0 * std::numbers::pi * mu * n;
      double env = std::exp(-0.5 * static_cast<double>(n) * n * mu * mu);
      double d = (-2.0 * std::numbers::pi * n * std::sin(ang) -
                  static_cast<double>(n) * n * mu * std::cos(ang)) *
                 env;
      row[c + n] = d;
      row[c - n] = d;
    }
  }
  return k;
}

namespace fbdetail {

// Valid-mode correlation y[m] = sum_j x[m+j] g[j] for an even-symmetric g,
// folded around the center tap. The inner loops run over m so they vectorize
// without changing each output's summation order (d ascending).
inline void conv_valid_even(const double* x, const double* g, int L,
                            double* y, std::size_t yn) {
  const int c = (L - 1) / 2;
  const double gc = g[c];
  for (std::size_t m = 0; m < yn; ++m) y[m] = gc * x[m + c];
  for (int d = 1; d <= c; ++d) {
    const double gd = g[c + d];
    const double* xp = x + c + d;
    const double* xm = x + c - d;
    for (std::size_t m = 0; m < yn; ++m) y[m] += gd * (xp[m] + xm[m]);
  }
}

}  // namespace fbdetail

// Learned time-frequency representation: F x T log mean squared filter
// outputs, one column per frame.
struct LearnedSpectrogram {
  Matrix values;  // F x T
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  int sample_rate = 0;
};

// Everything the backward pass needs. Frames of a FrameSequence are slices of
// one signal, so the per-frame valid convolutions are slices of a single
// whole-signal convolution; conv_out holds that shared result.
struct FbCache {
  Vec signal;
  std::size_t frame_len = 0, hop = 0, num_frames = 0;
  std::size_t valid = 0;     // conv outputs per frame: frame_len - L + 1
  std::size_t conv_len = 0;  // (T-1)*hop + valid
  Matrix conv_out;           // F x conv_len
  Matrix energy;             // F x T mean squared conv output
  FilterbankParams params;
};

// Per frame t and filter i: valid 1-D convolution of the frame with g_i,
// elementwise square, arithmetic mean, log(mean + eps).
inline LearnedSpectrogram fb_forward(const FrameSequence& frames,
                                     const FilterbankParams& p,
                                     FbCache* cache = nullptr) {
  p.validate();
  const auto L = static_cast<std::size_t>(p.kernel_len);
  if (frames.frame_len < L)
    fail("fb_forward: frame_len shorter than kernel_len");
  const std::size_t F = p.num_filters();
  const std::size_t T = frames.num_frames;
  const std::size_t valid = frames.frame_len - L + 1;
  const std::size_t conv_len = (T - 1) * frames.hop + valid;

  Matrix kernels = build_kernels(p);
  Matrix conv(F, conv_len);
  for (std::size_t i = 0; i < F; ++i)
    fbdetail::conv_valid_even(frames.signal.data(), kernels.row(i),
                              p.kernel_len, conv.row(i), conv_len);

  LearnedSpectrogram out;
  out.values = Matrix(F, T);
  out.frame_len = frames.frame_len;
  out.hop = frames.hop;
  out.sample_rate = frames.sample_rate;
  Matrix energy(F, T);
  for (std::size_t i = 0; i < F; ++i) {
    const double* y = conv.row(i);
    for (std::size_t t = 0; t < T; ++t) {
      const double* w = y + t * frames.hop;
      double acc = 0.0;
      for (std::size_t m = 0; m < valid; ++m) acc += w[m] * w[m];
      double e = acc / static_cast<double>(valid);
      energy(i, t) = e;
      out.values(i, t) = std::log(e + p.eps);
    }
  }

  if (cache) {
    cache->signal = frames.signal;
    cache->frame_len = frames.frame_len;
    cache->hop = frames.hop;
    cache->num_frames = T;
    cache->valid = valid;
    cache->conv_len = conv_len;
    cache->conv_out = std::move(conv);
    cache->energy = std::move(energy);
    cache->params = p;
  }
  return out;
}

// Exact gradient of the scalar loss w.r.t. each mu_i, given the upstream
// gradient on I. Chain: log -> mean -> square -> convolution -> kernel.
// Accumulation runs frames ascending, taps ascending, so it is deterministic.
inline Vec fb_backward(const Matrix& grad_I, const FbCache& cache) {
  const FilterbankParams& p = cache.params;
  const std::size_t F = p.num_filters();
  const std::size_t T = cache.num_frames;
  if (grad_I.rows != F || grad_I.cols != T)
    fail("fb_backward: grad shape does not match cache");
  Matrix kprime = kernel_grad_mu(p);
  Vec grad_mu(F, 0.0);
  Vec coeff(cache.conv_len);
  Vec dconv_dmu(cache.conv_len);
  const double inv_valid = 1.0 / static_cast<double>(cache.valid);
  for (std::size_t i = 0; i < F; ++i) {
    // coeff[m] = sum over frames covering m of dI/(e+eps)/valid
    std::fill(coeff.begin(), coeff.end(), 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      double a = grad_I(i, t) / (cache.energy(i, t) + p.eps) * inv_valid;
      double* c = coeff.data() + t * cache.hop;
      for (std::size_t m = 0; m < cache.valid; ++m) c[m] += a;
    }
    // d y[m] / d mu_i = (x correlated with d g_i / d mu_i)[m]
    fbdetail::conv_valid_even(cache.signal.data(), kprime.row(i),
                              p.kernel_len, dconv_dmu.data(), cache.conv_len);
    const double* y = cache.conv_out.row(i);
    double acc = 0.0;
    for (std::size_t m = 0; m < cache.conv_len; ++m)
      acc += coeff[m] * 2.0 * y[m] * dconv_dmu[m];
    grad_mu[i] = acc;
  }
  return grad_mu;
}

// Magnitude of the zero-padded DFT of one kernel row, bins 0..n_fft/2.
inline Vec frequency_response(std::span<const double> kernel,
                              std::size_t n_fft) {
  return magnitude_spectrum(kernel, n_fft);
}

// -3 dB bandwidth (in cycles/sample) of a magnitude response on the half
// spectrum, via linear interpolation of the crossings around the peak.
// Returns a quiet NaN when a crossing is missing on either side.
inline double bandwidth_3db(const Vec& response, std::size_t n_fft) {
  check_arg(response.size() >= 3, "bandwidth_3db: response too short");
  std::size_t peak = 0;
  for (std::size_t k = 1; k < response.size(); ++k)
    if (response[k] > response[peak]) peak = k;
  const double target = response[peak] / std::numbers::sqrt2;
  double left = -1.0, right = -1.0;
  for (std::size_t k = peak; k-- > 0;) {
    if (response[k] < target) {
      double frac = (response[k + 1] - target) / (response[k + 1] - response[k]);
      left = static_cast<double>(k + 1) - frac;
      break;
    }
  }
  for (std::size_t k = peak + 1; k < response.size(); ++k) {
    if (response[k] < target) {
      double frac = (response[k - 1] - target) / (response[k - 1] - response[k]);
      right = static_cast<double>(k - 1) + frac;
      break;
    }
  }
  if (left < 0.0 || right < 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  return (right - left) / static_cast<double>(n_fft);
}

}  // namespace cosgauss
