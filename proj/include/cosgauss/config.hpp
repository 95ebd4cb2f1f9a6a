// cosgauss/config.hpp
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

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "cosgauss/classifier.hpp"
#include "cosgauss/common.hpp"
#include "cosgauss/cpc.hpp"
#include "cosgauss/synth.hpp"

namespace cosgauss {

// Every tunable of every module, with the documented defaults. All randomness
// in a run flows from `seed`; modules derive their streams with fixed
// splitmix64 offsets.
struct RunConfig {
  std::uint64_t seed = 1;
  int jobs = 1;

  int sample_rate = 16000;
  std::size_t frame_len = 640;  // 40 ms
  std::size_t hop = 160;        // 10 ms

  int synth_n_per_class = 50;
  double synth_duration_s = 0.5;
  double synth_class0_lo = 500.0, synth_class0_hi = 1500.0;
  double synth_class1_lo = 3000.0, synth_class1_hi = 4000.0;
  double synth_snr_db = 5.0;
  int synth_folds = 0;

  std::size_t num_filters = 64;
  int kernel_len = 257;
  double mu_min = 0.004, mu_max = 0.45;
  double fb_eps = 1e-10;
  double f_min = 64.0, f_max = 6000.0;

  std::size_t relevance_hidden = 51;
  std::size_t lstm_hidden = 64;

  int epochs = 30;
  double lr = 1e-3;
  int batch = 4;
  int delta_window = 2;
  double stop_auc = 0.0;

  int cpc_horizon = 4;
  int cpc_negatives = 10;
  std::size_t cpc_context_dim = 64;
  double cpc_lr = 1e-3;
  int cpc_steps = 200;
  int cpc_batch = 4;
  int cpc_anchors = 8;
};

namespace cfgdetail {

enum class Kind { kU64, kInt, kSize, kDouble };

struct Entry {
  const char* key;
  Kind kind;
  void* ptr;
};

inline std::vector<Entry> registry(RunConfig& c) {
  return {
      {"seed", Kind::kU64, &c.seed},
      {"jobs", Kind::kInt, &c.jobs},
      {"audio.sample_rate", Kind::kInt, &c.sample_rate},
      {"audio.frame_len", Kind::kSize, &c.frame_len},
      {"audio.hop", Kind::kSize, &c.hop},
      {"synth.n_per_class", Kind::kInt, &c.synth_n_per_class},
      {"synth.duration_s", Kind::kDouble, &c.synth_duration_s},
      {"synth.class0_lo", Kind::kDouble, &c.synth_class0_lo},
      {"synth.class0_hi", Kind::kDouble, &c.synth_class0_hi},
      {"synth.class1_lo", Kind::kDouble, &c.synth_class1_lo},
      {"synth.class1_hi", Kind::kDouble, &c.synth_class1_hi},
      {"synth.snr_db", Kind::kDouble, &c.synth_snr_db},
      {"synth.folds", Kind::kInt, &c.synth_folds},
      {"filters.F", Kind::kSize, &c.num_filters},
      {"filters.L", Kind::kInt, &c.kernel_len},
      {"filters.mu_min", Kind::kDouble, &c.mu_min},
      {"filters.mu_max", Kind::kDouble, &c.mu_max},
      {"filters.eps", Kind::kDouble, &c.fb_eps},
      {"filters.f_min", Kind::kDouble, &c.f_min},
      {"filters.f_max", Kind::kDouble, &c.f_max},
      {"relevance.hidden", Kind::kSize, &c.relevance_hidden},
      {"backend.hidden", Kind::kSize, &c.lstm_hidden},
      {"train.epochs", Kind::kInt, &c.epochs},
      {"train.lr", Kind::kDouble, &c.lr},
      {"train.batch", Kind::kInt, &c.batch},
      {"train.delta_window", Kind::kInt, &c.delta_window},
      {"train.stop_auc", Kind::kDouble, &c.stop_auc},
      {"cpc.K", Kind::kInt, &c.cpc_horizon},
      {"cpc.N", Kind::kInt, &c.cpc_negatives},
      {"cpc.C", Kind::kSize, &c.cpc_context_dim},
      {"cpc.lr", Kind::kDouble, &c.cpc_lr},
      {"cpc.steps", Kind::kInt, &c.cpc_steps},
      {"cpc.batch", Kind::kInt, &c.cpc_batch},
      {"cpc.anchors", Kind::kInt, &c.cpc_anchors},
  };
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

inline void set_value(const Entry& e, const std::string& raw) {
  const std::string v = trim(raw);
  if (v.empty()) fail(std::string("config: empty value for ") + e.key);
  auto bad = [&] {
    fail(std::string("config: cannot parse value '") + v + "' for " + e.key);
  };
  switch (e.kind) {
    case Kind::kU64: {
      std::uint64_t x = 0;
      auto r = std::from_chars(v.data(), v.data() + v.size(), x);
      if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad();
      *static_cast<std::uint64_t*>(e.ptr) = x;
      break;
    }
    case Kind::kInt: {
      int x = 0;
      auto r = std::from_chars(v.data(), v.data() + v.size(), x);
      if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad();
      *static_cast<int*>(e.ptr) = x;
      break;
    }
    case Kind::kSize: {
      std::size_t x = 0;
      auto r = std::from_chars(v.data(), v.data() + v.size(), x);
      if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad();
      *static_cast<std::size_t*>(e.ptr) = x;
      break;
    }
    case Kind::kDouble: {
      char* end = nullptr;
      double x = std::strtod(v.c_str(), &end);
      if (end != v.c_str() + v.size()) bad();
      *static_cast<double*>(e.ptr) = x;
      break;
    }
  }
}

}  // namespace cfgdetail

// Applies one `key = value` assignment; unknown keys are rejected.
inline void apply_config_pair(RunConfig& cfg, const std::string& key,
                              const std::string& value) {
  for (const auto& e : cfgdetail::registry(cfg)) {
    if (key == e.key) {
      cfgdetail::set_value(e, value);
      return;
    }
  }
  fail("config: unknown key '" + key + "'");
}

inline void apply_config_line(RunConfig& cfg, const std::string& line) {
  std::string body = line;
  auto hash = body.find('#');
  if (hash != std::string::npos) body = body.substr(0, hash);
  body = cfgdetail::trim(body);
  if (body.empty()) return;
  auto eq = body.find('=');
  if (eq == std::string::npos)
    fail("config: expected 'key = value', got '" + line + "'");
  apply_config_pair(cfg, cfgdetail::trim(body.substr(0, eq)),
                    body.substr(eq + 1));
}

// Cross-field validation, run before any work starts. Each failure names the
// violated constraint.
inline void validate_config(const RunConfig& c) {
  check_arg(c.jobs >= 1, "config: jobs must be >= 1");
  check_arg(c.sample_rate > 0, "config: audio.sample_rate must be positive");
  check_arg(c.frame_len >= 1 && c.hop >= 1,
            "config: audio.frame_len and audio.hop must be >= 1");
  check_arg(c.num_filters >= 1, "config: filters.F must be >= 1");
  check_arg(c.kernel_len >= 1 && c.kernel_len % 2 == 1,
            "config: filters.L must be odd and >= 1");
  check_arg(c.frame_len >= static_cast<std::size_t>(c.kernel_len),
            "config: audio.frame_len must be >= filters.L");
  check_arg(c.mu_min > 0.0, "config: filters.mu_min must be > 0");
  check_arg(c.mu_max < 0.5, "config: filters.mu_max must be < 0.5");
  check_arg(c.mu_min <= c.mu_max,
            "config: filters.mu_min must be <= filters.mu_max");
  check_arg(c.fb_eps > 0.0, "config: filters.eps must be > 0");
  check_arg(c.f_min > 0.0 && c.f_min < c.f_max &&
                c.f_max <= c.sample_rate / 2.0,
            "config: need 0 < filters.f_min < filters.f_max <= sample_rate/2");
  check_arg(c.f_min / c.sample_rate >= c.mu_min,
            "config: filters.f_min/sample_rate must be >= filters.mu_min");
  check_arg(c.f_max / c.sample_rate <= c.mu_max,
            "config: filters.f_max/sample_rate must be <= filters.mu_max");
  check_arg(c.relevance_hidden >= 1, "config: relevance.hidden must be >= 1");
  check_arg(c.lstm_hidden >= 1, "config: backend.hidden must be >= 1");
  check_arg(c.epochs >= 1, "config: train.epochs must be >= 1");
  check_arg(c.lr > 0.0, "config: train.lr must be > 0");
  check_arg(c.batch >= 1, "config: train.batch must be >= 1");
  check_arg(c.delta_window >= 1, "config: train.delta_window must be >= 1");
  check_arg(c.stop_auc >= 0.0 && c.stop_auc <= 1.0,
            "config: train.stop_auc must lie in [0, 1]");
  check_arg(c.synth_n_per_class >= 1, "config: synth.n_per_class must be >= 1");
  check_arg(c.synth_duration_s > 0.0, "config: synth.duration_s must be > 0");
  check_arg(c.synth_folds == 0 || c.synth_folds >= 2,
            "config: synth.folds must be 0 or >= 2");
  check_arg(c.cpc_horizon >= 1, "config: cpc.K must be >= 1");
  check_arg(c.cpc_negatives >= 1, "config: cpc.N must be >= 1");
  check_arg(c.cpc_context_dim >= 1, "config: cpc.C must be >= 1");
  check_arg(c.cpc_lr > 0.0, "config: cpc.lr must be > 0");
  check_arg(c.cpc_steps >= 1 && c.cpc_batch >= 1 && c.cpc_anchors >= 1,
            "config: cpc.steps, cpc.batch, cpc.anchors must be >= 1");
}

// Flat `key = value` file, one pair per line, `#` comments, unknown keys
// rejected, missing keys keep their defaults.
inline RunConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail("parse_config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    apply_config_line(cfg, line);
  }
  validate_config(cfg);
  return cfg;
}

// Fully resolved key = value dump (defaults included), for run logs.
inline std::string dump_config(const RunConfig& cfg) {
  RunConfig& c = const_cast<RunConfig&>(cfg);
  std::string out;
  char buf[64];
  for (const auto& e : cfgdetail::registry(c)) {
    out += e.key;
    out += " = ";
    switch (e.kind) {
      case cfgdetail::Kind::kU64:
        out += std::to_string(*static_cast<std::uint64_t*>(e.ptr));
        break;
      case cfgdetail::Kind::kInt:
        out += std::to_string(*static_cast<int*>(e.ptr));
        break;
      case cfgdetail::Kind::kSize:
        out += std::to_string(*static_cast<std::size_t*>(e.ptr));
        break;
      case cfgdetail::Kind::kDouble:
        std::snprintf(buf, sizeof(buf), "%.17g",
                      *static_cast<double*>(e.ptr));
        out += buf;
        break;
    }
    out += "\n";
  }
  return out;
}

// Adapters into the per-module configuration structs.

inline SynthSpec synth_spec(const RunConfig& c) {
  SynthSpec s;
  s.n_per_class = c.synth_n_per_class;
  s.duration_s = c.synth_duration_s;
  s.class0_lo = c.synth_class0_lo;
  s.class0_hi = c.synth_class0_hi;
  s.class1_lo = c.synth_class1_lo;
  s.class1_hi = c.synth_class1_hi;
  s.snr_db = c.synth_snr_db;
  s.seed = c.seed;
  s.sample_rate = c.sample_rate;
  return s;
}

inline BackendSetup backend_setup(const RunConfig& c) {
  BackendSetup s;
  s.num_filters = c.num_filters;
  s.kernel_len = c.kernel_len;
  s.mu_min = c.mu_min;
  s.mu_max = c.mu_max;
  s.eps = c.fb_eps;
  s.f_min = c.f_min;
  s.f_max = c.f_max;
  s.relevance_hidden = c.relevance_hidden;
  s.lstm_hidden = c.lstm_hidden;
  s.sample_rate = c.sample_rate;
  s.frame_len = c.frame_len;
  s.hop = c.hop;
  s.delta_window = c.delta_window;
  return s;
}

inline TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  t.epochs = c.epochs;
  t.lr = c.lr;
  t.batch = c.batch;
  t.seed = c.seed;
  t.stop_auc = c.stop_auc;
  t.jobs = c.jobs;
  return t;
}

inline CpcSetup cpc_setup(const RunConfig& c) {
  CpcSetup s;
  s.num_filters = c.num_filters;
  s.kernel_len = c.kernel_len;
  s.mu_min = c.mu_min;
  s.mu_max = c.mu_max;
  s.eps = c.fb_eps;
  s.f_min = c.f_min;
  s.f_max = c.f_max;
  s.sample_rate = c.sample_rate;
  s.frame_len = c.frame_len;
  s.hop = c.hop;
  return s;
}

inline CpcConfig cpc_config(const RunConfig& c) {
  CpcConfig k;
  k.horizon = c.cpc_horizon;
  k.negatives = c.cpc_negatives;
  k.context_dim = c.cpc_context_dim;
  k.lr = c.cpc_lr;
  k.steps = c.cpc_steps;
  k.batch = c.cpc_batch;
  k.anchors_per_file = c.cpc_anchors;
  k.seed = c.seed;
  return k;
}

}  // namespace cosgauss
