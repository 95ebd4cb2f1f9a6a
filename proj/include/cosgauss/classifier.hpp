// cosgauss/classifier.hpp
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
#include <cstdint>
#include <future>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cosgauss/audio.hpp"
#include "cosgauss/auc.hpp"
#include "cosgauss/common.hpp"
#include "cosgauss/dataset.hpp"
#include "cosgauss/features.hpp"
#include "cosgauss/filterbank.hpp"
#include "cosgauss/losses.hpp"
#include "cosgauss/nn.hpp"
#include "cosgauss/optim.hpp"
#include "cosgauss/relevance.hpp"
#include "cosgauss/wav.hpp"

namespace cosgauss {

// Full supervised pipeline: filterbank -> relevance mask -> delta stacking ->
// per-recording z-score -> two BiLSTM layers -> mean pool -> scalar logit.
struct BackendModel {
  FilterbankParams fb;
  RelevanceNet relev;
  BiLstm blstm1, blstm2;
  Dense head;  // 2*Hc -> 1

  int sample_rate = 16000;
  std::size_t frame_len = 640;
  std::size_t hop = 160;
  int delta_window = 2;

  std::size_t num_filters() const { return fb.num_filters(); }
};

struct BackendGrads {
  Vec mu;
  RelevanceGrad relev;
  BiLstmGrad blstm1, blstm2;
  DenseGrad head;
};

inline BackendGrads zeros_like(const BackendModel& m) {
  BackendGrads g;
  g.mu.assign(m.fb.num_filters(), 0.0);
  g.relev = zeros_like(m.relev);
  g.blstm1 = zeros_like(m.blstm1);
  g.blstm2 = zeros_like(m.blstm2);
  g.head = zeros_like(m.head);
  return g;
}

namespace refdetail {

inline const char* kGateSuffix[4] = {"i", "f", "o", "g"};

template <typename CellLike>
void append_lstm(CellLike& c, const std::string& prefix, ParamRefs& out) {
  for (int q = 0; q < 4; ++q)
    out.push_back({prefix + ".W" + kGateSuffix[q], c.W[q].v.data(),
                   {c.W[q].rows, c.W[q].cols}});
  for (int q = 0; q < 4; ++q)
    out.push_back({prefix + ".U" + kGateSuffix[q], c.U[q].v.data(),
                   {c.U[q].rows, c.U[q].cols}});
  for (int q = 0; q < 4; ++q)
    out.push_back({prefix + ".b" + kGateSuffix[q], c.b[q].data(),
                   {c.b[q].size()}});
}

template <typename BiLike>
void append_bilstm(BiLike& b, const std::string& prefix, ParamRefs& out) {
  append_lstm(b.fwd, prefix + ".fwd", out);
  append_lstm(b.bwd, prefix + ".bwd", out);
}

template <typename RelevLike>
void append_relev(RelevLike& r, ParamRefs& out) {
  out.push_back({"relev.W1", r.W1.v.data(), {r.W1.rows, r.W1.cols}});
  out.push_back({"relev.b1", r.b1.data(), {r.b1.size()}});
  out.push_back({"relev.W2", r.W2.data(), {r.W2.size()}});
  out.push_back({"relev.b2", &r.b2, {1}});
}

template <typename DenseLike>
void append_dense(DenseLike& d, const std::string& prefix, ParamRefs& out) {
  out.push_back({prefix + ".W", d.W.v.data(), {d.W.rows, d.W.cols}});
  out.push_back({prefix + ".b", d.b.data(), {d.b.size()}});
}

}  // namespace refdetail

inline ParamRefs param_refs(BackendModel& m) {
  ParamRefs out;
  out.push_back({"fb.mu", m.fb.mu.data(), {m.fb.mu.size()}});
  refdetail::append_relev(m.relev, out);
  refdetail::append_bilstm(m.blstm1, "blstm1", out);
  refdetail::append_bilstm(m.blstm2, "blstm2", out);
  refdetail::append_dense(m.head, "head", out);
  return out;
}

inline ParamRefs param_refs(BackendGrads& g) {
  ParamRefs out;
  out.push_back({"fb.mu", g.mu.data(), {g.mu.size()}});
  refdetail::append_relev(g.relev, out);
  refdetail::append_bilstm(g.blstm1, "blstm1", out);
  refdetail::append_bilstm(g.blstm2, "blstm2", out);
  refdetail::append_dense(g.head, "head", out);
  return out;
}

inline void add_scaled(BackendGrads& dst, BackendGrads& src, double scale) {
  ParamRefs a = param_refs(dst), b = param_refs(src);
  for (std::size_t g = 0; g < a.size(); ++g)
    for (std::size_t k = 0; k < a[g].size(); ++k)
      a[g].data[k] += scale * b[g].data[k];
}

// Stream seed for model initialization, derived from the run seed with a
// fixed offset.
inline std::uint64_t model_init_seed(std::uint64_t seed) {
  return splitmix64(seed ^ 0x6d6f64656c5f696eULL);
}

struct BackendSetup {
  std::size_t num_filters = 64;
  int kernel_len = 257;
  double mu_min = 0.004, mu_max = 0.45, eps = 1e-10;
  double f_min = 64.0, f_max = 6000.0;
  std::size_t relevance_hidden = 51;
  std::size_t lstm_hidden = 64;
  int sample_rate = 16000;
  std::size_t frame_len = 640;
  std::size_t hop = 160;
  int delta_window = 2;
};

inline BackendModel make_backend(const BackendSetup& s, Rng& rng) {
  BackendModel m;
  m.fb.mu = init_mel_centers(s.num_filters, s.f_min, s.f_max, s.sample_rate);
  m.fb.kernel_len = s.kernel_len;
  m.fb.mu_min = s.mu_min;
  m.fb.mu_max = s.mu_max;
  m.fb.eps = s.eps;
  m.fb.clamp_mu();
  m.fb.validate();
  m.relev = RelevanceNet::init(s.relevance_hidden, rng);
  m.blstm1 = BiLstm::init(3 * s.num_filters, s.lstm_hidden, rng);
  m.blstm2 = BiLstm::init(2 * s.lstm_hidden, s.lstm_hidden, rng);
  m.head = Dense::init(2 * s.lstm_hidden, 1, rng);
  m.sample_rate = s.sample_rate;
  m.frame_len = s.frame_len;
  m.hop = s.hop;
  m.delta_window = s.delta_window;
  return m;
}

struct ForwardCache {
  FbCache fb;
  RelevanceCache rel;
  Matrix J;
  NormalizeCache norm;
  Matrix seq;  // T x 3F input to blstm1
  BiLstmCache b1, b2;
  Matrix H2;
  Vec pooled;
  double logit = 0.0;
};

inline Matrix transpose(const Matrix& x) {
  Matrix out(x.cols, x.rows);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < x.cols; ++c) out(c, r) = x(r, c);
  return out;
}

// Returns p in (0, 1). The waveform is resampled to the model rate if needed.
inline double model_forward(const Waveform& w, const BackendModel& m,
                            ForwardCache* cache) {
  ForwardCache local;
  ForwardCache& cc = cache ? *cache : local;
  const Waveform* wp = &w;
  Waveform resampled;
  if (w.sample_rate != m.sample_rate) {
    resampled = resample_linear(w, m.sample_rate);
    wp = &resampled;
  }
  FrameSequence frames = frame_signal(*wp, m.frame_len, m.hop);
  if (frames.num_frames < 2)
    fail("model_forward: audio too short (need at least 2 frames)");
  LearnedSpectrogram spec = fb_forward(frames, m.fb, &cc.fb);
  Matrix M = relevance_forward(spec.values, m.relev, &cc.rel);
  cc.J = apply_mask(spec.values, M);
  Matrix X = delta_features(cc.J, m.delta_window);
  Matrix Z = normalize_features(X, &cc.norm);
  cc.seq = transpose(Z);
  Matrix H1 = bilstm_forward(cc.seq, m.blstm1, &cc.b1);
  cc.H2 = bilstm_forward(H1, m.blstm2, &cc.b2);
  const std::size_t T = cc.H2.rows, D = cc.H2.cols;
  cc.pooled.assign(D, 0.0);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t d = 0; d < D; ++d) cc.pooled[d] += cc.H2(t, d);
  for (std::size_t d = 0; d < D; ++d) cc.pooled[d] /= static_cast<double>(T);
  cc.logit = m.head.forward(cc.pooled)[0];
  return sigmoid(cc.logit);
}

// Accumulates d loss / d params into *grads given d loss / d logit.
// skip_fb skips the filterbank gradient (used when filters are frozen);
// skip_relev additionally skips the relevance parameter gradients. Both
// together skip the whole front-end backward pass.
inline void model_backward(double dlogit, const ForwardCache& cc,
                           const BackendModel& m, BackendGrads* grads,
                           bool skip_fb = false, bool skip_relev = false) {
  const std::size_t T = cc.H2.rows, D = cc.H2.cols;
  Vec dpooled;
  Vec dl{dlogit};
  dense_backward(m.head, cc.pooled, dl, &grads->head, &dpooled);
  Matrix dH2(T, D);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t d = 0; d < D; ++d)
      dH2(t, d) = dpooled[d] / static_cast<double>(T);
  Matrix dH1, dSeq;
  bilstm_backward(dH2, m.blstm2, cc.b2, &grads->blstm2, &dH1);
  bilstm_backward(dH1, m.blstm1, cc.b1, &grads->blstm1, &dSeq);
  if (skip_fb && skip_relev) return;
  Matrix dZ = transpose(dSeq);
  Matrix dX = normalize_features_backward(dZ, cc.norm);
  Matrix dJ = delta_features_backward(dX, m.num_filters(), m.delta_window);
  Matrix dI;
  RelevanceGrad drelev;
  relevance_backward(dJ, cc.rel, m.relev, &dI, &drelev);
  if (!skip_relev) {
    for (std::size_t k = 0; k < drelev.W1.v.size(); ++k)
      grads->relev.W1.v[k] += drelev.W1.v[k];
    for (std::size_t k = 0; k < drelev.b1.size(); ++k)
      grads->relev.b1[k] += drelev.b1[k];
    for (std::size_t k = 0; k < drelev.W2.size(); ++k)
      grads->relev.W2[k] += drelev.W2[k];
    grads->relev.b2 += drelev.b2;
  }
  if (!skip_fb) {
    Vec dmu = fb_backward(dI, cc.fb);
    for (std::size_t k = 0; k < dmu.size(); ++k) grads->mu[k] += dmu[k];
  }
}

inline double predict_waveform(const BackendModel& m, const Waveform& w) {
  return model_forward(w, m, nullptr);
}

inline double predict_file(const BackendModel& m, const std::string& path) {
  Waveform w = read_wav(path);
  return predict_waveform(m, resample_linear(w, m.sample_rate));
}

// Index-ordered scores; files are scored independently, optionally across
// jobs threads.
inline Vec score_waveforms(const BackendModel& m,
                           const std::vector<Waveform>& ws, int jobs = 1) {
  Vec scores(ws.size(), 0.0);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < ws.size(); ++i)
      scores[i] = predict_waveform(m, ws[i]);
    return scores;
  }
  std::size_t next = 0;
  while (next < ws.size()) {
    std::size_t end = std::min(ws.size(), next + static_cast<std::size_t>(jobs));
    std::vector<std::future<double>> futs;
    for (std::size_t i = next; i < end; ++i)
      futs.push_back(std::async(std::launch::async, [&m, &ws, i] {
        return predict_waveform(m, ws[i]);
      }));
    for (std::size_t i = next; i < end; ++i)
      scores[i] = futs[i - next].get();
    next = end;
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Supervised training.

struct TrainConfig {
  int epochs = 30;
  double lr = 1e-3;
  int batch = 4;
  std::uint64_t seed = 1;
  bool freeze_filters = false;
  bool freeze_relevance = false;
  double stop_auc = 0.0;  // > 0: stop once val AUC reaches this
  int jobs = 1;

  void validate() const {
    check_arg(epochs >= 1, "train: epochs must be >= 1");
    check_arg(lr > 0.0, "train: lr must be positive");
    check_arg(batch >= 1, "train: batch must be >= 1");
  }
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_auc = std::numeric_limits<double>::quiet_NaN();
};

using TrainHistory = std::vector<EpochStats>;

struct LoadedSample {
  Waveform wave;
  int label = 0;
};

inline std::vector<LoadedSample> load_samples(const Manifest& manifest,
                                              int sample_rate) {
  std::vector<LoadedSample> out;
  out.reserve(manifest.size());
  for (const auto& e : manifest) {
    Waveform w = read_wav(e.path);
    out.push_back({resample_linear(w, sample_rate), e.label});
  }
  return out;
}

inline bool manifest_has_both_classes(const Manifest& m) {
  bool c0 = false, c1 = false;
  for (const auto& e : m) (e.label == 0 ? c0 : c1) = true;
  return c0 && c1;
}

// Adam on BCE over whole recordings; gradients averaged over the batch, mu
// projected into its clamps after every step, frozen groups untouched.
// Deterministic given the seed: fixed shuffle, fixed accumulation order.
inline TrainHistory train_supervised(const Manifest& train_manifest,
                                     const Manifest& val_manifest,
                                     const TrainConfig& cfg,
                                     BackendModel& model) {
  cfg.validate();
  check_arg(!train_manifest.empty(), "train: empty training manifest");
  if (!manifest_has_both_classes(train_manifest))
    fail("train: training manifest must contain both classes");

  std::vector<LoadedSample> train = load_samples(train_manifest, model.sample_rate);
  std::vector<LoadedSample> val = load_samples(val_manifest, model.sample_rate);

  Rng shuffle_rng(splitmix64(cfg.seed ^ 0x7261696e5f6f7264ULL));
  AdamState adam;
  adam.lr = cfg.lr;
  auto frozen = [&cfg](const std::string& name) {
    if (cfg.freeze_filters && name.rfind("fb.", 0) == 0) return true;
    if (cfg.freeze_relevance && name.rfind("relev.", 0) == 0) return true;
    return false;
  };

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const bool skip_fb = cfg.freeze_filters;
  const bool skip_relev = cfg.freeze_relevance;
  auto sample_pass = [&](std::size_t idx) {
    std::pair<double, BackendGrads> out{0.0, zeros_like(model)};
    ForwardCache cache;
    double p = model_forward(train[idx].wave, model, &cache);
    (void)p;
    BceResult r = bce_loss(cache.logit, train[idx].label);
    out.first = r.loss;
    model_backward(r.dlogit, cache, model, &out.second, skip_fb, skip_relev);
    return out;
  };

  TrainHistory history;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      const double scale = 1.0 / static_cast<double>(end - start);
      BackendGrads accum = zeros_like(model);
      if (cfg.jobs > 1) {
        std::vector<std::future<std::pair<double, BackendGrads>>> futs;
        for (std::size_t k = start; k < end; ++k)
          futs.push_back(std::async(std::launch::async, sample_pass, order[k]));
        for (auto& fut : futs) {
          auto res = fut.get();
          loss_sum += res.first;
          add_scaled(accum, res.second, scale);
        }
      } else {
        for (std::size_t k = start; k < end; ++k) {
          auto res = sample_pass(order[k]);
          loss_sum += res.first;
          add_scaled(accum, res.second, scale);
        }
      }
      ParamRefs mrefs = param_refs(model);
      ParamRefs grefs = param_refs(accum);
      adam_update(mrefs, grefs, adam, frozen);
      model.fb.clamp_mu();
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train.size());
    if (!val.empty() && manifest_has_both_classes(val_manifest)) {
      std::vector<Waveform> ws;
      ws.reserve(val.size());
      for (auto& s : val) ws.push_back(s.wave);
      Vec scores = score_waveforms(model, ws, cfg.jobs);
      ScoredSet set;
      for (std::size_t i = 0; i < val.size(); ++i)
        set.push_back({scores[i], val[i].label});
      stats.val_auc = roc_auc(set);
    }
    history.push_back(stats);
    if (cfg.stop_auc > 0.0 && !std::isnan(stats.val_auc) &&
        stats.val_auc >= cfg.stop_auc)
      break;
  }
  return history;
}

}  // namespace cosgauss
