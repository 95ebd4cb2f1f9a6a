// cosgauss/cpc.hpp
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

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "cosgauss/audio.hpp"
#include "cosgauss/classifier.hpp"
#include "cosgauss/common.hpp"
#include "cosgauss/dataset.hpp"
#include "cosgauss/filterbank.hpp"
#include "cosgauss/losses.hpp"
#include "cosgauss/nn.hpp"
#include "cosgauss/optim.hpp"

namespace cosgauss {

// Contrastive predictive coding over filterbank frame encodings: z_t are the
// raw log-energy columns of I (no relevance weighting), g_ar is a
// unidirectional LSTM whose hidden state is the context c_t, and one affine
// head per horizon k scores candidates by dot product.
struct CpcModel {
  FilterbankParams fb;
  LstmCell gar;              // F -> C
  std::vector<Dense> heads;  // K heads, C -> F

  int sample_rate = 16000;
  std::size_t frame_len = 640;
  std::size_t hop = 160;

  std::size_t num_filters() const { return fb.num_filters(); }
  int horizon() const { return static_cast<int>(heads.size()); }
};

struct CpcGrads {
  Vec mu;
  LstmGrad gar;
  std::vector<DenseGrad> heads;
};

inline CpcGrads zeros_like(const CpcModel& m) {
  CpcGrads g;
  g.mu.assign(m.fb.num_filters(), 0.0);
  g.gar = zeros_like(m.gar);
  for (const auto& h : m.heads) g.heads.push_back(zeros_like(h));
  return g;
}

namespace cpcdetail {

template <typename ModelLike>
ParamRefs refs_impl(Vec& mu, ModelLike& m) {
  ParamRefs out;
  out.push_back({"fb.mu", mu.data(), {mu.size()}});
  refdetail::append_lstm(m.gar, "gar", out);
  for (std::size_t k = 0; k < m.heads.size(); ++k)
    refdetail::append_dense(m.heads[k], "head" + std::to_string(k + 1), out);
  return out;
}

}  // namespace cpcdetail

inline ParamRefs param_refs(CpcModel& m) {
  return cpcdetail::refs_impl(m.fb.mu, m);
}

inline ParamRefs param_refs(CpcGrads& g) {
  return cpcdetail::refs_impl(g.mu, g);
}

struct CpcConfig {
  int horizon = 4;       // K
  int negatives = 10;    // N per positive
  std::size_t context_dim = 64;
  double lr = 1e-3;
  int steps = 200;
  int batch = 4;
  int anchors_per_file = 8;
  std::uint64_t seed = 1;

  void validate() const {
    check_arg(horizon >= 1, "cpc: horizon must be >= 1");
    check_arg(negatives >= 1, "cpc: negatives must be >= 1");
    check_arg(context_dim >= 1, "cpc: context_dim must be >= 1");
    check_arg(lr > 0.0, "cpc: lr must be positive");
    check_arg(steps >= 1 && batch >= 1 && anchors_per_file >= 1,
              "cpc: steps, batch and anchors must be >= 1");
  }
};

struct CpcSetup {
  std::size_t num_filters = 64;
  int kernel_len = 257;
  double mu_min = 0.004, mu_max = 0.45, eps = 1e-10;
  double f_min = 64.0, f_max = 6000.0;
  int sample_rate = 16000;
  std::size_t frame_len = 640;
  std::size_t hop = 160;
};

inline CpcModel make_cpc(const CpcSetup& s, const CpcConfig& cfg, Rng& rng) {
  CpcModel m;
  m.fb.mu = init_mel_centers(s.num_filters, s.f_min, s.f_max, s.sample_rate);
  m.fb.kernel_len = s.kernel_len;
  m.fb.mu_min = s.mu_min;
  m.fb.mu_max = s.mu_max;
  m.fb.eps = s.eps;
  m.fb.clamp_mu();
  m.fb.validate();
  m.gar = LstmCell::init(s.num_filters, cfg.context_dim, rng);
  for (int k = 0; k < cfg.horizon; ++k)
    m.heads.push_back(Dense::init(cfg.context_dim, s.num_filters, rng));
  m.sample_rate = s.sample_rate;
  m.frame_len = s.frame_len;
  m.hop = s.hop;
  return m;
}

// Frame encodings z_1..z_T: the columns of the learned spectrogram I.
// Throws when the file yields fewer than min_frames frames.
inline Matrix encode_frames(const Waveform& w, const CpcModel& m,
                            std::size_t min_frames, FbCache* cache = nullptr) {
  const Waveform* wp = &w;
  Waveform resampled;
  if (w.sample_rate != m.sample_rate) {
    resampled = resample_linear(w, m.sample_rate);
    wp = &resampled;
  }
  if (wp->samples.size() < m.frame_len)
    fail("encode_frames: audio shorter than one frame");
  FrameSequence frames = frame_signal(*wp, m.frame_len, m.hop);
  if (frames.num_frames < min_frames)
    fail("encode_frames: too few frames for the prediction horizon");
  return fb_forward(frames, m.fb, cache).values;  // F x T
}

// c_t = LSTM hidden state after consuming z_1..z_t (zero initial state).
// Input is T x F (one encoding per row); output is T x C.
inline Matrix context_forward(const Matrix& z_seq, const LstmCell& gar,
                              LstmSeqCache* cache = nullptr) {
  return lstm_forward_seq(z_seq, gar, cache);
}

// score_j = <head(c_t), z_j>; the first candidate is the positive.
inline Vec cpc_scores(std::span<const double> c_t,
                      const std::vector<std::span<const double>>& candidates,
                      const Dense& head) {
  Vec pred = head.forward(c_t);
  Vec scores(candidates.size(), 0.0);
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    check_arg(candidates[j].size() == pred.size(),
              "cpc_scores: candidate dimension mismatch");
    double acc = 0.0;
    for (std::size_t d = 0; d < pred.size(); ++d)
      acc += pred[d] * candidates[j][d];
    scores[j] = acc;
  }
  return scores;
}

struct CpcStepStats {
  int step = 0;
  double loss = 0.0;
  double accuracy = 0.0;  // fraction of tasks where the positive wins
};

using CpcHistory = std::vector<CpcStepStats>;

namespace cpcdetail {

struct BatchFile {
  Matrix z_seq;  // T x F
  FbCache fb;
  Matrix ctx;    // T x C
  LstmSeqCache gar;
};

// One InfoNCE pass over a batch. When grads is null this only scores, so it
// doubles as the evaluation path.
struct BatchResult {
  double loss_sum = 0.0;
  int tasks = 0;
  int wins = 0;
};

inline BatchResult run_batch(CpcModel& model, std::vector<BatchFile>& files,
                             const CpcConfig& cfg, Rng& rng, CpcGrads* grads) {
  const std::size_t F = model.num_filters();
  const int K = cfg.horizon;

  // candidate pool: (file, frame) pairs, in file-major order
  std::vector<std::size_t> file_offset(files.size() + 1, 0);
  for (std::size_t j = 0; j < files.size(); ++j)
    file_offset[j + 1] = file_offset[j] + files[j].z_seq.rows;
  const std::size_t pool = file_offset.back();

  struct Task {
    std::size_t file, t;
    int k;
    std::vector<std::size_t> negs;  // pool indices
  };
  std::vector<Task> tasks;
  for (std::size_t j = 0; j < files.size(); ++j) {
    const std::size_t T = files[j].z_seq.rows;
    for (int a = 0; a < cfg.anchors_per_file; ++a) {
      const std::size_t t = rng.below(T - static_cast<std::size_t>(K));
      for (int k = 1; k <= K; ++k) {
        Task task;
        task.file = j;
        task.t = t;
        task.k = k;
        const std::size_t pos_idx = file_offset[j] + t + static_cast<std::size_t>(k);
        for (int n = 0; n < cfg.negatives; ++n) {
          std::size_t r = rng.below(pool - 1);
          if (r >= pos_idx) ++r;  // uniform over the pool minus the positive
          task.negs.push_back(r);
        }
        tasks.push_back(std::move(task));
      }
    }
  }

  auto pool_z = [&](std::size_t idx) -> const double* {
    std::size_t j = 0;
    while (file_offset[j + 1] <= idx) ++j;
    return files[j].z_seq.row(idx - file_offset[j]);
  };

  BatchResult res;
  res.tasks = static_cast<int>(tasks.size());
  const double scale = grads ? 1.0 / static_cast<double>(tasks.size()) : 0.0;

  std::vector<Matrix> dSeq, dCtx;
  if (grads) {
    for (auto& f : files) {
      dSeq.emplace_back(f.z_seq.rows, F);
      dCtx.emplace_back(f.ctx.rows, f.ctx.cols);
    }
  }

  Vec negs(cfg.negatives);
  Vec dpred(F);
  for (const Task& task : tasks) {
    BatchFile& bf = files[task.file];
    const Dense& head = model.heads[static_cast<std::size_t>(task.k - 1)];
    Vec pred = head.forward(bf.ctx.row_span(task.t));
    const std::size_t pos_row = task.t + static_cast<std::size_t>(task.k);
    const double* zpos = bf.z_seq.row(pos_row);
    double pos = 0.0;
    for (std::size_t d = 0; d < F; ++d) pos += pred[d] * zpos[d];
    for (int n = 0; n < cfg.negatives; ++n) {
      const double* zn = pool_z(task.negs[static_cast<std::size_t>(n)]);
      double s = 0.0;
      for (std::size_t d = 0; d < F; ++d) s += pred[d] * zn[d];
      negs[static_cast<std::size_t>(n)] = s;
    }
    InfoNceResult nce = info_nce_loss(pos, negs);
    res.loss_sum += nce.loss;
    if (nce.positive_wins) ++res.wins;
    if (!grads) continue;

    std::fill(dpred.begin(), dpred.end(), 0.0);
    const double dp = nce.dpos * scale;
    for (std::size_t d = 0; d < F; ++d) {
      dpred[d] += dp * zpos[d];
      dSeq[task.file](pos_row, d) += dp * pred[d];
    }
    for (int n = 0; n < cfg.negatives; ++n) {
      const std::size_t idx = task.negs[static_cast<std::size_t>(n)];
      const double* zn = pool_z(idx);
      const double dn = nce.dnegs[static_cast<std::size_t>(n)] * scale;
      std::size_t j = 0;
      while (file_offset[j + 1] <= idx) ++j;
      double* drow = dSeq[j].row(idx - file_offset[j]);
      for (std::size_t d = 0; d < F; ++d) {
        dpred[d] += dn * zn[d];
        drow[d] += dn * pred[d];
      }
    }
    Vec dc;
    dense_backward(head, bf.ctx.row_span(task.t), dpred,
                   &grads->heads[static_cast<std::size_t>(task.k - 1)], &dc);
    for (std::size_t d = 0; d < dc.size(); ++d)
      dCtx[task.file](task.t, d) += dc[d];
  }

  if (grads) {
    for (std::size_t j = 0; j < files.size(); ++j) {
      Matrix dIn;
      lstm_backward_seq(dCtx[j], model.gar, files[j].gar, &grads->gar, &dIn);
      for (std::size_t r = 0; r < dIn.rows; ++r)
        for (std::size_t c = 0; c < dIn.cols; ++c)
          dSeq[j](r, c) += dIn(r, c);
      Matrix dI = transpose(dSeq[j]);
      Vec dmu = fb_backward(dI, files[j].fb);
      for (std::size_t i = 0; i < dmu.size(); ++i) grads->mu[i] += dmu[i];
    }
  }
  return res;
}

inline BatchFile encode_batch_file(CpcModel& model, const Waveform& w, int K) {
  BatchFile bf;
  Matrix I = encode_frames(w, model, static_cast<std::size_t>(K) + 1, &bf.fb);
  bf.z_seq = transpose(I);
  bf.ctx = context_forward(bf.z_seq, model.gar, &bf.gar);
  return bf;
}

}  // namespace cpcdetail

// Self-supervised pretraining. Labels in the manifest are never read; files
// too short for the horizon are skipped with a warning. Deterministic given
// the seed.
inline CpcHistory pretrain_cpc(const Manifest& manifest, const CpcConfig& cfg,
                               CpcModel& model) {
  cfg.validate();
  check_arg(!manifest.empty(), "pretrain_cpc: empty manifest");

  std::vector<Waveform> waves;
  for (const auto& e : manifest) {
    Waveform w = resample_linear(read_wav(e.path), model.sample_rate);
    if (w.samples.size() < model.frame_len ||
        (w.samples.size() - model.frame_len) / model.hop + 1 <
            static_cast<std::size_t>(cfg.horizon) + 1) {
      std::cerr << "pretrain_cpc: skipping too-short file " << e.path << "\n";
      continue;
    }
    waves.push_back(std::move(w));
  }
  if (waves.empty()) fail("pretrain_cpc: no file yields enough frames");

  Rng rng(splitmix64(cfg.seed ^ 0x6370635f72756eULL));
  AdamState adam;
  adam.lr = cfg.lr;

  std::vector<std::size_t> order(waves.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t pos = order.size();  // force shuffle on first step

  CpcHistory history;
  for (int step = 1; step <= cfg.steps; ++step) {
    const auto B = std::min<std::size_t>(
        static_cast<std::size_t>(cfg.batch), waves.size());
    if (pos + B > order.size()) {
      rng.shuffle(order);
      pos = 0;
    }
    std::vector<cpcdetail::BatchFile> files;
    for (std::size_t j = 0; j < B; ++j)
      files.push_back(
          cpcdetail::encode_batch_file(model, waves[order[pos + j]],
                                       cfg.horizon));
    pos += B;

    CpcGrads grads = zeros_like(model);
    cpcdetail::BatchResult res =
        cpcdetail::run_batch(model, files, cfg, rng, &grads);
    ParamRefs mrefs = param_refs(model);
    ParamRefs grefs = param_refs(grads);
    adam_update(mrefs, grefs, adam);
    model.fb.clamp_mu();

    CpcStepStats stats;
    stats.step = step;
    stats.loss = res.loss_sum / res.tasks;
    stats.accuracy = static_cast<double>(res.wins) / res.tasks;
    history.push_back(stats);
  }
  return history;
}

// Scores at least min_tasks anchor tasks without training; used to measure
// chance-level accuracy and post-training accuracy.
struct CpcEvalStats {
  double loss = 0.0;
  double accuracy = 0.0;
  int tasks = 0;
};

inline CpcEvalStats cpc_evaluate(CpcModel& model, const Manifest& manifest,
                                 const CpcConfig& cfg, int min_tasks) {
  cfg.validate();
  std::vector<Waveform> waves;
  for (const auto& e : manifest) {
    Waveform w = resample_linear(read_wav(e.path), model.sample_rate);
    if (w.samples.size() < model.frame_len ||
        (w.samples.size() - model.frame_len) / model.hop + 1 <
            static_cast<std::size_t>(cfg.horizon) + 1)
      continue;
    waves.push_back(std::move(w));
  }
  if (waves.empty()) fail("cpc_evaluate: no file yields enough frames");
  Rng rng(splitmix64(cfg.seed ^ 0x6370635f6576616cULL));
  CpcEvalStats out;
  double loss_sum = 0.0;
  int wins = 0;
  std::size_t pos = 0;
  while (out.tasks < min_tasks) {
    const auto B = std::min<std::size_t>(
        static_cast<std::size_t>(cfg.batch), waves.size());
    std::vector<cpcdetail::BatchFile> files;
    for (std::size_t j = 0; j < B; ++j)
      files.push_back(cpcdetail::encode_batch_file(
          model, waves[(pos + j) % waves.size()], cfg.horizon));
    pos = (pos + B) % waves.size();
    cpcdetail::BatchResult res =
        cpcdetail::run_batch(model, files, cfg, rng, nullptr);
    loss_sum += res.loss_sum;
    wins += res.wins;
    out.tasks += res.tasks;
  }
  out.loss = loss_sum / out.tasks;
  out.accuracy = static_cast<double>(wins) / out.tasks;
  return out;
}

}  // namespace cosgauss
