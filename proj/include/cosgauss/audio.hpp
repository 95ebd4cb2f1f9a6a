// cosgauss/audio.hpp
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
#include <span>

#include "cosgauss/common.hpp"
#include "cosgauss/wav.hpp"

namespace cosgauss {

// Linear interpolation onto a uniform grid at target_rate.
// Output length = round(len * target / source).
inline Waveform resample_linear(const Waveform& w, int target_rate) {
  check_arg(target_rate > 0, "resample_linear: target_rate must be positive");
  check_arg(w.sample_rate > 0, "resample_linear: source rate must be positive");
  if (target_rate == w.sample_rate) return w;
  Waveform out;
  out.sample_rate = target_rate;
  if (w.samples.empty()) return out;
  const double step = static_cast<double>(w.sample_rate) /
                      static_cast<double>(target_rate);
  const auto out_len = static_cast<std::size_t>(std::llround(
      static_cast<double>(w.samples.size()) * target_rate / w.sample_rate));
  out.samples.resize(out_len);
  const std::size_t last = w.samples.size() - 1;
  for (std::size_t j = 0; j < out_len; ++j) {
    double pos = static_cast<double>(j) * step;
    if (pos >= static_cast<double>(last)) {
      out.samples[j] = w.samples[last];
      continue;
    }
    auto i0 = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(i0);
    out.samples[j] =
        w.samples[i0] * (1.0 - frac) + w.samples[i0 + 1] * frac;
  }
  return out;
}

// Rectangular framing of a signal: frame t covers samples
// [t*hop, t*hop + frame_len). The trailing partial frame is dropped. Frames
// are views into the stored signal, never materialized.
struct FrameSequence {
  Vec signal;
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  std::size_t num_frames = 0;
  int sample_rate = 0;

  std::span<const double> frame(std::size_t t) const {
    return {signal.data() + t * hop, frame_len};
  }
};

inline FrameSequence frame_signal(const Waveform& w, std::size_t frame_len,
                                  std::size_t hop) {
  check_arg(frame_len >= 1 && hop >= 1,
            "frame_signal: frame_len and hop must be >= 1");
  if (w.samples.size() < frame_len)
    fail("frame_signal: signal shorter than one frame");
  FrameSequence fs;
  fs.signal = w.samples;
  fs.frame_len = frame_len;
  fs.hop = hop;
  fs.num_frames = (w.samples.size() - frame_len) / hop + 1;
  fs.sample_rate = w.sample_rate;
  return fs;
}

}  // namespace cosgauss
