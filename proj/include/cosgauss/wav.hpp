// cosgauss/wav.hpp
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
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cosgauss/common.hpp"

namespace cosgauss {

// Raw audio: amplitudes in [-1, 1] at a positive integer sample rate.
struct Waveform {
  Vec samples;
  int sample_rate = 0;
};

namespace wavdetail {

inline std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] |
                                    (static_cast<std::uint16_t>(p[1]) << 8));
}

inline void put32(std::string& s, std::uint32_t x) {
  s.push_back(static_cast<char>(x & 0xff));
  s.push_back(static_cast<char>((x >> 8) & 0xff));
  s.push_back(static_cast<char>((x >> 16) & 0xff));
  s.push_back(static_cast<char>((x >> 24) & 0xff));
}

inline void put16(std::string& s, std::uint16_t x) {
  s.push_back(static_cast<char>(x & 0xff));
  s.push_back(static_cast<char>((x >> 8) & 0xff));
}

}  // namespace wavdetail

// Reads a RIFF/WAVE file. Only PCM 16-bit mono is accepted; integer samples
// are scaled by 1/32768 into [-1, 1). Unknown chunks are skipped.
inline Waveform read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail("read_wav: cannot open file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 ||
      std::memcmp(p + 8, "WAVE", 4) != 0)
    fail("read_wav: not a RIFF/WAVE file: " + path);

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_off = 0, data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= n) {
    const unsigned char* ck = p + off;
    std::uint32_t ck_len = wavdetail::le32(ck + 4);
    std::size_t body = off + 8;
    if (body + ck_len > n) fail("read_wav: truncated chunk in " + path);
    if (std::memcmp(ck, "fmt ", 4) == 0) {
      if (ck_len < 16) fail("read_wav: malformed fmt chunk in " + path);
      format = wavdetail::le16(ck + 8);
      channels = wavdetail::le16(ck + 10);
      rate = wavdetail::le32(ck + 12);
      bits = wavdetail::le16(ck + 22);
      have_fmt = true;
    } else if (std::memcmp(ck, "data", 4) == 0) {
      data_off = body;
      data_len = ck_len;
    }
    off = body + ck_len + (ck_len & 1);  // chunks are word aligned
  }
  if (!have_fmt || data_off == 0)
    fail("read_wav: missing fmt or data chunk in " + path);
  if (format != 1)
    fail("read_wav: unsupported format (non-PCM) in " + path);
  if (channels != 1)
    fail("read_wav: unsupported format (only mono accepted) in " + path);
  if (bits != 16)
    fail("read_wav: unsupported format (only 16-bit accepted) in " + path);
  if (rate == 0) fail("read_wav: zero sample rate in " + path);

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  const std::size_t count = data_len / 2;
  w.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint16_t u = wavdetail::le16(p + data_off + 2 * i);
    auto s = static_cast<std::int16_t>(u);
    w.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return w;
}

// Writes PCM 16-bit mono; samples rounded and clamped to int16 range.
inline void write_wav(const std::string& path, const Waveform& w) {
  check_arg(w.sample_rate > 0, "write_wav: sample_rate must be positive");
  std::string out;
  const std::uint32_t data_len =
      static_cast<std::uint32_t>(w.samples.size() * 2);
  out.reserve(44 + data_len);
  out.append("RIFF");
  wavdetail::put32(out, 36 + data_len);
  out.append("WAVE");
  out.append("fmt ");
  wavdetail::put32(out, 16);
  wavdetail::put16(out, 1);  // PCM
  wavdetail::put16(out, 1);  // mono
  wavdetail::put32(out, static_cast<std::uint32_t>(w.sample_rate));
  wavdetail::put32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  wavdetail::put16(out, 2);
  wavdetail::put16(out, 16);
  out.append("data");
  wavdetail::put32(out, data_len);
  for (double x : w.samples) {
    double q = std::round(x * 32768.0);
    if (q > 32767.0) q = 32767.0;
    if (q < -32768.0) q = -32768.0;
    wavdetail::put16(out, static_cast<std::uint16_t>(
                              static_cast<std::int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail("write_wav: cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail("write_wav: write failed: " + path);
}

}  // namespace cosgauss
