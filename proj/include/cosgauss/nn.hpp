// cosgauss/nn.hpp
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
#include <array>
#include <cmath>
#include <span>

#include "cosgauss/common.hpp"
#include "cosgauss/rng.hpp"

namespace cosgauss {

// Weight init used everywhere: uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
inline void init_uniform(Matrix& w, std::size_t fan_in, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& x : w.v) x = rng.uniform(-s, s);
}

// ---------------------------------------------------------------------------
// Dense layer: y = W' x + b, W stored in x out.

struct Dense {
  Matrix W;
  Vec b;

  std::size_t in() const { return W.rows; }
  std::size_t out() const { return W.cols; }

  static Dense zeros(std::size_t in, std::size_t out) {
    Dense d;
    d.W = Matrix(in, out);
    d.b.assign(out, 0.0);
    return d;
  }

  static Dense init(std::size_t in, std::size_t out, Rng& rng) {
    Dense d = zeros(in, out);
    init_uniform(d.W, in, rng);
    return d;
  }

  Vec forward(std::span<const double> x) const {
    check_arg(x.size() == in(), "dense: input dimension mismatch");
    Vec y(b);
    for (std::size_t i = 0; i < in(); ++i) {
      const double xi = x[i];
      const double* w = W.row(i);
      for (std::size_t o = 0; o < out(); ++o) y[o] += xi * w[o];
    }
    return y;
  }
};

struct DenseGrad {
  Matrix W;
  Vec b;
};

inline DenseGrad zeros_like(const Dense& d) {
  DenseGrad g;
  g.W = Matrix(d.W.rows, d.W.cols);
  g.b.assign(d.b.size(), 0.0);
  return g;
}

// Accumulates into grad; writes dx if non-null.
inline void dense_backward(const Dense& layer, std::span<const double> x,
                           std::span<const double> dy, DenseGrad* grad,
                           Vec* dx) {
  check_arg(x.size() == layer.in() && dy.size() == layer.out(),
            "dense_backward: shape mismatch");
  for (std::size_t o = 0; o < layer.out(); ++o) grad->b[o] += dy[o];
  if (dx) dx->assign(layer.in(), 0.0);
  for (std::size_t i = 0; i < layer.in(); ++i) {
    const double xi = x[i];
    const double* w = layer.W.row(i);
    double* gw = grad->W.row(i);
    double acc = 0.0;
    for (std::size_t o = 0; o < layer.out(); ++o) {
      gw[o] += xi * dy[o];
      acc += w[o] * dy[o];
    }
    if (dx) (*dx)[i] = acc;
  }
}

// ---------------------------------------------------------------------------
// LSTM cell. Gate order: input, forget, output, candidate. Sigmoid gates,
// tanh candidate and output nonlinearity; initial states zero; forget-gate
// bias starts at +1.

enum LstmGate { kGateIn = 0, kGateForget = 1, kGateOut = 2, kGateCand = 3 };

struct LstmCell {
  std::array<Matrix, 4> W;  // input weights, D x H each
  std::array<Matrix, 4> U;  // recurrent weights, H x H each
  std::array<Vec, 4> b;

  std::size_t in() const { return W[0].rows; }
  std::size_t hidden() const { return W[0].cols; }

  static LstmCell zeros(std::size_t in, std::size_t hidden) {
    LstmCell c;
    for (int q = 0; q < 4; ++q) {
      c.W[q] = Matrix(in, hidden);
      c.U[q] = Matrix(hidden, hidden);
      c.b[q].assign(hidden, 0.0);
    }
    return c;
  }

  static LstmCell init(std::size_t in, std::size_t hidden, Rng& rng) {
    LstmCell c = zeros(in, hidden);
    for (int q = 0; q < 4; ++q) {
      init_uniform(c.W[q], in, rng);
      init_uniform(c.U[q], hidden, rng);
    }
    c.b[kGateForget].assign(hidden, 1.0);
    return c;
  }
};

struct LstmGrad {
  std::array<Matrix, 4> W;
  std::array<Matrix, 4> U;
  std::array<Vec, 4> b;
};

inline LstmGrad zeros_like(const LstmCell& c) {
  LstmGrad g;
  for (int q = 0; q < 4; ++q) {
    g.W[q] = Matrix(c.W[q].rows, c.W[q].cols);
    g.U[q] = Matrix(c.U[q].rows, c.U[q].cols);
    g.b[q].assign(c.b[q].size(), 0.0);
  }
  return g;
}

// Single step; h_prev/c_prev may be empty spans meaning the zero state.
inline void lstm_step(const LstmCell& cell, std::span<const double> x,
                      std::span<const double> h_prev,
                      std::span<const double> c_prev, Vec* h_out, Vec* c_out,
                      std::array<Vec, 4>* gates_out = nullptr) {
  const std::size_t H = cell.hidden();
  check_arg(x.size() == cell.in(), "lstm_step: input dimension mismatch");
  check_arg(h_prev.empty() || h_prev.size() == H,
            "lstm_step: h_prev dimension mismatch");
  check_arg(c_prev.empty() || c_prev.size() == H,
            "lstm_step: c_prev dimension mismatch");
  std::array<Vec, 4> pre;
  for (int q = 0; q < 4; ++q) {
    pre[q] = cell.b[q];
    for (std::size_t d = 0; d < cell.in(); ++d) {
      const double xd = x[d];
      const double* w = cell.W[q].row(d);
      for (std::size_t hh = 0; hh < H; ++hh) pre[q][hh] += xd * w[hh];
    }
    if (!h_prev.empty()) {
      for (std::size_t d = 0; d < H; ++d) {
        const double hd = h_prev[d];
        const double* u = cell.U[q].row(d);
        for (std::size_t hh = 0; hh < H; ++hh) pre[q][hh] += hd * u[hh];
      }
    }
  }
  h_out->resize(H);
  c_out->resize(H);
  for (std::size_t hh = 0; hh < H; ++hh) {
    double gi = sigmoid(pre[kGateIn][hh]);
    double gf = sigmoid(pre[kGateForget][hh]);
    double go = sigmoid(pre[kGateOut][hh]);
    double gc = std::tanh(pre[kGateCand][hh]);
    double cp = c_prev.empty() ? 0.0 : c_prev[hh];
    double c = gf * cp + gi * gc;
    (*c_out)[hh] = c;
    (*h_out)[hh] = go * std::tanh(c);
    if (gates_out) {
      (*gates_out)[kGateIn][hh] = gi;
      (*gates_out)[kGateForget][hh] = gf;
      (*gates_out)[kGateOut][hh] = go;
      (*gates_out)[kGateCand][hh] = gc;
    }
  }
}

// Cache of one unidirectional pass over a T x D sequence.
struct LstmSeqCache {
  Matrix x;                     // T x D
  std::array<Matrix, 4> gates;  // activated gates, T x H each
  Matrix c;                     // T x H
  Matrix h;                     // T x H
};

inline Matrix lstm_forward_seq(const Matrix& X, const LstmCell& cell,
                               LstmSeqCache* cache = nullptr) {
  check_arg(X.rows >= 1, "lstm_forward_seq: empty sequence");
  check_arg(X.cols == cell.in(), "lstm_forward_seq: input dim mismatch");
  const std::size_t T = X.rows, H = cell.hidden();
  Matrix hs(T, H), cs(T, H);
  std::array<Matrix, 4> gates;
  for (auto& g : gates) g = Matrix(T, H);
  Vec h, c;
  std::array<Vec, 4> step_gates;
  for (auto& g : step_gates) g.assign(H, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    std::span<const double> hp =
        t == 0 ? std::span<const double>{} : std::span<const double>{hs.row(t - 1), H};
    std::span<const double> cp =
        t == 0 ? std::span<const double>{} : std::span<const double>{cs.row(t - 1), H};
    lstm_step(cell, X.row_span(t), hp, cp, &h, &c, &step_gates);
    std::copy(h.begin(), h.end(), hs.row(t));
    std::copy(c.begin(), c.end(), cs.row(t));
    for (int q = 0; q < 4; ++q)
      std::copy(step_gates[q].begin(), step_gates[q].end(), gates[q].row(t));
  }
  if (cache) {
    cache->x = X;
    cache->gates = std::move(gates);
    cache->c = std::move(cs);
    cache->h = hs;
  }
  return hs;
}

// Backpropagation through time. dH is the upstream gradient on the hidden
// outputs; grads accumulate into *grad; writes d loss / d inputs into dX if
// non-null.
inline void lstm_backward_seq(const Matrix& dH, const LstmCell& cell,
                              const LstmSeqCache& cache, LstmGrad* grad,
                              Matrix* dX) {
  const std::size_t T = cache.x.rows, D = cell.in(), H = cell.hidden();
  check_arg(dH.rows == T && dH.cols == H, "lstm_backward_seq: shape mismatch");
  if (dX) *dX = Matrix(T, D);
  Vec dh_carry(H, 0.0), dc_carry(H, 0.0);
  std::array<Vec, 4> da;
  for (auto& a : da) a.assign(H, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    const double* c_prev = t == 0 ? nullptr : cache.c.row(t - 1);
    const double* h_prev = t == 0 ? nullptr : cache.h.row(t - 1);
    for (std::size_t hh = 0; hh < H; ++hh) {
      double dht = dH(t, hh) + dh_carry[hh];
      double gi = cache.gates[kGateIn](t, hh);
      double gf = cache.gates[kGateForget](t, hh);
      double go = cache.gates[kGateOut](t, hh);
      double gc = cache.gates[kGateCand](t, hh);
      double tc = std::tanh(cache.c(t, hh));
      double dgo = dht * tc;
      double dc = dc_carry[hh] + dht * go * (1.0 - tc * tc);
      double dgi = dc * gc;
      double dgc = dc * gi;
      double dgf = dc * (c_prev ? c_prev[hh] : 0.0);
      dc_carry[hh] = dc * gf;
      da[kGateIn][hh] = dgi * gi * (1.0 - gi);
      da[kGateForget][hh] = dgf * gf * (1.0 - gf);
      da[kGateOut][hh] = dgo * go * (1.0 - go);
      da[kGateCand][hh] = dgc * (1.0 - gc * gc);
    }
    std::fill(dh_carry.begin(), dh_carry.end(), 0.0);
    for (int q = 0; q < 4; ++q) {
      const Vec& a = da[q];
      for (std::size_t hh = 0; hh < H; ++hh) grad->b[q][hh] += a[hh];
      const double* xt = cache.x.row(t);
      for (std::size_t d = 0; d < D; ++d) {
        const double xd = xt[d];
        double* gw = grad->W[q].row(d);
        const double* w = cell.W[q].row(d);
        double acc = 0.0;
        for (std::size_t hh = 0; hh < H; ++hh) {
          gw[hh] += xd * a[hh];
          acc += w[hh] * a[hh];
        }
        if (dX) (*dX)(t, d) += acc;
      }
      if (h_prev) {
        for (std::size_t d = 0; d < H; ++d) {
          const double hd = h_prev[d];
          double* gu = grad->U[q].row(d);
          const double* u = cell.U[q].row(d);
          double acc = 0.0;
          for (std::size_t hh = 0; hh < H; ++hh) {
            gu[hh] += hd * a[hh];
            acc += u[hh] * a[hh];
          }
          dh_carry[d] += acc;
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Bidirectional LSTM: concatenation of a forward pass and a reversed backward
// pass per step, both starting from zero states.

struct BiLstm {
  LstmCell fwd, bwd;

  std::size_t in() const { return fwd.in(); }
  std::size_t out() const { return fwd.hidden() + bwd.hidden(); }

  static BiLstm zeros(std::size_t in, std::size_t hidden) {
    return {LstmCell::zeros(in, hidden), LstmCell::zeros(in, hidden)};
  }
  static BiLstm init(std::size_t in, std::size_t hidden, Rng& rng) {
    BiLstm b;
    b.fwd = LstmCell::init(in, hidden, rng);
    b.bwd = LstmCell::init(in, hidden, rng);
    return b;
  }
};

struct BiLstmGrad {
  LstmGrad fwd, bwd;
};

inline BiLstmGrad zeros_like(const BiLstm& b) {
  return {zeros_like(b.fwd), zeros_like(b.bwd)};
}

struct BiLstmCache {
  LstmSeqCache fwd;
  LstmSeqCache bwd;  // over the reversed sequence
};

inline Matrix reverse_rows(const Matrix& X) {
  Matrix out(X.rows, X.cols);
  for (std::size_t t = 0; t < X.rows; ++t)
    std::copy(X.row(X.rows - 1 - t), X.row(X.rows - 1 - t) + X.cols,
              out.row(t));
  return out;
}

inline Matrix bilstm_forward(const Matrix& X, const BiLstm& layer,
                             BiLstmCache* cache = nullptr) {
  if (X.rows == 0) fail("bilstm_forward: empty sequence");
  const std::size_t T = X.rows, H = layer.fwd.hidden();
  LstmSeqCache cf, cb;
  Matrix hf = lstm_forward_seq(X, layer.fwd, cache ? &cache->fwd : &cf);
  Matrix hb = lstm_forward_seq(reverse_rows(X), layer.bwd,
                               cache ? &cache->bwd : &cb);
  Matrix out(T, 2 * H);
  for (std::size_t t = 0; t < T; ++t) {
    std::copy(hf.row(t), hf.row(t) + H, out.row(t));
    std::copy(hb.row(T - 1 - t), hb.row(T - 1 - t) + H, out.row(t) + H);
  }
  return out;
}

inline void bilstm_backward(const Matrix& dOut, const BiLstm& layer,
                            const BiLstmCache& cache, BiLstmGrad* grad,
                            Matrix* dX) {
  const std::size_t T = dOut.rows, H = layer.fwd.hidden();
  check_arg(dOut.cols == 2 * H, "bilstm_backward: shape mismatch");
  Matrix dHf(T, H), dHb(T, H);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t hh = 0; hh < H; ++hh) {
      dHf(t, hh) = dOut(t, hh);
      dHb(T - 1 - t, hh) = dOut(t, H + hh);
    }
  }
  Matrix dXf, dXb;
  lstm_backward_seq(dHf, layer.fwd, cache.fwd, &grad->fwd, dX ? &dXf : nullptr);
  lstm_backward_seq(dHb, layer.bwd, cache.bwd, &grad->bwd, dX ? &dXb : nullptr);
  if (dX) {
    *dX = dXf;
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t d = 0; d < dX->cols; ++d)
        (*dX)(t, d) += dXb(T - 1 - t, d);
  }
}

}  // namespace cosgauss
