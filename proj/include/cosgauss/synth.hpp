// cosgauss/synth.hpp
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
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>

#include "cosgauss/common.hpp"
#include "cosgauss/dataset.hpp"
#include "cosgauss/rng.hpp"
#include "cosgauss/wav.hpp"

namespace cosgauss {

// Two-class synthetic corpus: each file is white noise plus one band-limited
// tone burst whose frequency lies inside the file's class band.
struct SynthSpec {
  int n_per_class = 50;
  double duration_s = 0.5;
  double class0_lo = 500.0, class0_hi = 1500.0;  // Hz
  double class1_lo = 3000.0, class1_hi = 4000.0;
  double snr_db = 5.0;
  std::uint64_t seed = 1;
  int sample_rate = 16000;
  double noise_sigma = 0.05;

  void validate() const {
    check_arg(n_per_class >= 1, "synth: n_per_class must be >= 1");
    check_arg(duration_s > 0.0, "synth: duration_s must be positive");
    const double ny = sample_rate / 2.0;
    check_arg(class0_lo > 0.0 && class0_lo < class0_hi && class0_hi < ny,
              "synth: class0 band must lie within (0, sample_rate/2)");
    check_arg(class1_lo > 0.0 && class1_lo < class1_hi && class1_hi < ny,
              "synth: class1 band must lie within (0, sample_rate/2)");
  }
};

// Per-file seed: fixed derivation so files are independent of generation
// order and of each other.
inline std::uint64_t synth_file_seed(std::uint64_t corpus_seed, int label,
                                     int index) {
  std::uint64_t h = splitmix64(corpus_seed ^
                               (0x9E3779B97F4A7C15ULL *
                                (static_cast<std::uint64_t>(label) + 1)));
  return splitmix64(h ^ static_cast<std::uint64_t>(index));
}

inline Waveform synth_signal(const SynthSpec& spec, int label, int index) {
  Rng rng(synth_file_seed(spec.seed, label, index));
  const double lo = label == 0 ? spec.class0_lo : spec.class1_lo;
  const double hi = label == 0 ? spec.class0_hi : spec.class1_hi;
  // Draw order is fixed: tone parameters first, then the noise samples.
  const double f = rng.uniform(lo, hi);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double start_frac = rng.uniform(0.0, 0.4);
  const double len_frac = rng.uniform(0.4, 0.8);

  const auto n = static_cast<std::size_t>(
      std::llround(spec.duration_s * spec.sample_rate));
  Waveform w;
  w.sample_rate = spec.sample_rate;
  w.samples.resize(n);
  for (std::size_t t = 0; t < n; ++t)
    w.samples[t] = spec.noise_sigma * rng.normal();

  // Tone amplitude from the SNR against the full-band noise power; sine
  // power is A^2/2.
  const double amp = spec.noise_sigma *
                     std::pow(10.0, spec.snr_db / 20.0) * std::numbers::sqrt2;
  auto start = static_cast<std::size_t>(start_frac * static_cast<double>(n));
  auto burst = static_cast<std::size_t>(len_frac * static_cast<double>(n));
  std::size_t end = std::min(n, start + burst);
  const auto ramp = static_cast<std::size_t>(0.005 * spec.sample_rate);
  for (std::size_t t = start; t < end; ++t) {
    double env = 1.0;
    if (t - start < ramp) env = static_cast<double>(t - start) / ramp;
    if (end - t <= ramp) env = std::min(env, static_cast<double>(end - t) / ramp);
    double s = amp * env *
               std::sin(2.0 * std::numbers::pi * f * static_cast<double>(t) /
                            spec.sample_rate +
                        phase);
    w.samples[t] += s;
  }
  for (double& x : w.samples) {
    if (x > 1.0) x = 1.0;
    if (x < -1.0) x = -1.0;
  }
  return w;
}

// Writes the WAVs plus a `path,label` manifest (paths relative to out_dir).
// Byte-identical output for the same spec and seed.
inline Manifest synth_corpus(const SynthSpec& spec, const std::string& out_dir) {
  spec.validate();
  std::filesystem::create_directories(out_dir);
  Manifest manifest;
  char name[64];
  for (int label = 0; label <= 1; ++label) {
    for (int i = 0; i < spec.n_per_class; ++i) {
      std::snprintf(name, sizeof(name), "class%d_%03d.wav", label, i);
      Waveform w = synth_signal(spec, label, i);
      write_wav((std::filesystem::path(out_dir) / name).string(), w);
      manifest.push_back({name, label});
    }
  }
  write_manifest((std::filesystem::path(out_dir) / "manifest.csv").string(),
                 manifest);
  return manifest;
}

// Optional stratified k-fold split of a freshly generated corpus. Fold k's
// validation set is every k-th file of each class; the rest train. Written as
// fold<k>_train.csv / fold<k>_val.csv next to the manifest.
inline void write_fold_manifests(const SynthSpec& spec,
                                 const std::string& out_dir, int folds) {
  check_arg(folds >= 2, "write_fold_manifests: folds must be >= 2");
  char name[64];
  for (int k = 0; k < folds; ++k) {
    Manifest train, val;
    for (int label = 0; label <= 1; ++label) {
      for (int i = 0; i < spec.n_per_class; ++i) {
        std::snprintf(name, sizeof(name), "class%d_%03d.wav", label, i);
        if (i % folds == k)
          val.push_back({name, label});
        else
          train.push_back({name, label});
      }
    }
    auto base = std::filesystem::path(out_dir);
    write_manifest((base / ("fold" + std::to_string(k) + "_train.csv")).string(),
                   train);
    write_manifest((base / ("fold" + std::to_string(k) + "_val.csv")).string(),
                   val);
  }
}

}  // namespace cosgauss
