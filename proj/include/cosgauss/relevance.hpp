// cosgauss/relevance.hpp
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

#include <cmath>
#include <cstddef>

#include "cosgauss/common.hpp"
#include "cosgauss/filterbank.hpp"
#include "cosgauss/rng.hpp"

namespace cosgauss {

// Context window: 51 past + 51 future frames of one sub-band trajectory,
// center frame excluded. Out-of-range frames replicate the edge.
inline constexpr std::size_t kContextHalf = 51;
inline constexpr std::size_t kContextLen = 2 * kContextHalf;  // 102

// Two-layer feed-forward scorer shared across all (filter, frame) bins:
// m = sigmoid(W2' tanh(W1' ctx + b1) + b2).
struct RelevanceNet {
  Matrix W1;  // kContextLen x H
  Vec b1;     // H
  Vec W2;     // H
  double b2 = 0.0;

  std::size_t hidden() const { return b1.size(); }

  static RelevanceNet zeros(std::size_t hidden) {
    RelevanceNet net;
    net.W1 = Matrix(kContextLen, hidden);
    net.b1.assign(hidden, 0.0);
    net.W2.assign(hidden, 0.0);
    net.b2 = 0.0;
    return net;
  }

  static RelevanceNet init(std::size_t hidden, Rng& rng) {
    RelevanceNet net = zeros(hidden);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(kContextLen));
    for (double& w : net.W1.v) w = rng.uniform(-s1, s1);
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (double& w : net.W2) w = rng.uniform(-s2, s2);
    return net;
  }
};

struct RelevanceGrad {
  Matrix W1;
  Vec b1;
  Vec W2;
  double b2 = 0.0;
};

inline RelevanceGrad zeros_like(const RelevanceNet& net) {
  RelevanceGrad g;
  g.W1 = Matrix(net.W1.rows, net.W1.cols);
  g.b1.assign(net.b1.size(), 0.0);
  g.W2.assign(net.W2.size(), 0.0);
  g.b2 = 0.0;
  return g;
}

// 102-vector of I[i, t-51..t-1] then I[i, t+1..t+51], edge replicated.
inline void extract_context(const Matrix& I, std::size_t t, std::size_t i,
                            double* out) {
  const auto T = static_cast<long>(I.cols);
  const double* row = I.row(i);
  std::size_t k = 0;
  for (long d = -static_cast<long>(kContextHalf); d <= static_cast<long>(kContextHalf); ++d) {
    if (d == 0) continue;
    long src = static_cast<long>(t) + d;
    if (src < 0) src = 0;
    if (src >= T) src = T - 1;
    out[k++] = row[src];
  }
}

inline Vec extract_context(const Matrix& I, std::size_t t, std::size_t i) {
  check_arg(i < I.rows && t < I.cols, "extract_context: index out of range");
  Vec ctx(kContextLen);
  extract_context(I, t, i, ctx.data());
  return ctx;
}

struct RelevanceCache {
  Matrix I;  // input the mask was computed from
  Matrix M;
};

// F x T mask, every entry strictly inside (0, 1).
inline Matrix relevance_forward(const Matrix& I, const RelevanceNet& net,
                                RelevanceCache* cache = nullptr) {
  check_arg(net.W1.rows == kContextLen && net.W1.cols == net.hidden() &&
                net.W2.size() == net.hidden(),
            "relevance_forward: inconsistent net dimensions");
  const std::size_t H = net.hidden();
  Matrix M(I.rows, I.cols);
  Vec ctx(kContextLen), pre(H);
  for (std::size_t i = 0; i < I.rows; ++i) {
    for (std::size_t t = 0; t < I.cols; ++t) {
      extract_context(I, t, i, ctx.data());
      for (std::size_t h = 0; h < H; ++h) pre[h] = net.b1[h];
      for (std::size_t d = 0; d < kContextLen; ++d) {
        const double xd = ctx[d];
        const double* w = net.W1.row(d);
        for (std::size_t h = 0; h < H; ++h) pre[h] += xd * w[h];
      }
      double logit = net.b2;
      for (std::size_t h = 0; h < H; ++h) logit += net.W2[h] * std::tanh(pre[h]);
      M(i, t) = sigmoid(logit);
    }
  }
  if (cache) {
    cache->I = I;
    cache->M = M;
  }
  return M;
}

// J = I (x) M, elementwise.
inline Matrix apply_mask(const Matrix& I, const Matrix& M) {
  check_arg(I.same_shape(M), "apply_mask: shape mismatch");
  Matrix J(I.rows, I.cols);
  for (std::size_t k = 0; k < J.v.size(); ++k) J.v[k] = I.v[k] * M.v[k];
  return J;
}

// Gradients through the product and the scorer. grad_I collects both the
// direct term grad_J (x) M and the term scattered back through every context
// window that read each I entry.
inline void relevance_backward(const Matrix& grad_J, const RelevanceCache& cache,
                               const RelevanceNet& net, Matrix* grad_I,
                               RelevanceGrad* grad_net) {
  const Matrix& I = cache.I;
  const Matrix& M = cache.M;
  check_arg(grad_J.same_shape(I), "relevance_backward: shape mismatch");
  const std::size_t H = net.hidden();
  *grad_I = Matrix(I.rows, I.cols);
  for (std::size_t k = 0; k < I.v.size(); ++k)
    grad_I->v[k] = grad_J.v[k] * M.v[k];
  *grad_net = zeros_like(net);

  const auto T = static_cast<long>(I.cols);
  Vec ctx(kContextLen), pre(H), hval(H), dpre(H);
  for (std::size_t i = 0; i < I.rows; ++i) {
    for (std::size_t t = 0; t < I.cols; ++t) {
      const double dM = grad_J(i, t) * I(i, t);
      if (dM == 0.0) continue;
      // recompute the hidden activations for this bin
      extract_context(I, t, i, ctx.data());
      for (std::size_t h = 0; h < H; ++h) pre[h] = net.b1[h];
      for (std::size_t d = 0; d < kContextLen; ++d) {
        const double xd = ctx[d];
        const double* w = net.W1.row(d);
        for (std::size_t h = 0; h < H; ++h) pre[h] += xd * w[h];
      }
      for (std::size_t h = 0; h < H; ++h) hval[h] = std::tanh(pre[h]);

      const double m = M(i, t);
      const double dlogit = dM * m * (1.0 - m);
      grad_net->b2 += dlogit;
      for (std::size_t h = 0; h < H; ++h) {
        grad_net->W2[h] += dlogit * hval[h];
        dpre[h] = dlogit * net.W2[h] * (1.0 - hval[h] * hval[h]);
        grad_net->b1[h] += dpre[h];
      }
      for (std::size_t d = 0; d < kContextLen; ++d) {
        const double xd = ctx[d];
        const double* w = net.W1.row(d);
        double* gw = grad_net->W1.row(d);
        double dctx = 0.0;
        for (std::size_t h = 0; h < H; ++h) {
          gw[h] += xd * dpre[h];
          dctx += w[h] * dpre[h];
        }
        // scatter back to the clamped source frame
        long off = static_cast<long>(d) - static_cast<long>(kContextHalf);
        if (off >= 0) ++off;  // center frame excluded
        long src = static_cast<long>(t) + off;
        if (src < 0) src = 0;
        if (src >= T) src = T - 1;
        (*grad_I)(i, static_cast<std::size_t>(src)) += dctx;
      }
    }
  }
}

}  // namespace cosgauss
