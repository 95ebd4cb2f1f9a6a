#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cosgauss/filterbank.hpp"
#include "cosgauss/gradcheck.hpp"
#include "helpers.hpp"

using namespace cosgauss;

namespace {

FilterbankParams tiny_params(Vec mu, int L = 33) {
  FilterbankParams p;
  p.mu = std::move(mu);
  p.kernel_len = L;
  p.mu_min = 0.004;
  p.mu_max = 0.45;
  p.eps = 1e-10;
  return p;
}

FrameSequence make_frames(const Vec& signal, std::size_t s, std::size_t hop) {
  Waveform w;
  w.sample_rate = 16000;
  w.samples = signal;
  return frame_signal(w, s, hop);
}

}  // namespace

TEST_CASE("mel scale and mel-spaced centers") {
  CHECK(hz_to_mel(1000.0) == doctest::Approx(999.9855371396244).epsilon(1e-12));

  Vec two = init_mel_centers(2, 300.0, 4000.0, 16000);
  CHECK(two[0] == doctest::Approx(300.0 / 16000.0).epsilon(1e-12));
  CHECK(two[1] == doctest::Approx(4000.0 / 16000.0).epsilon(1e-12));

  Vec mu = init_mel_centers(64, 60.0, 7800.0, 16000);
  REQUIRE(mu.size() == 64);
  for (std::size_t i = 1; i < mu.size(); ++i) CHECK(mu[i] > mu[i - 1]);
  CHECK(mu.front() > 0.0);
  CHECK(mu.back() <= 0.4875 + 1e-12);

  CHECK_THROWS_AS(init_mel_centers(4, 0.0, 100.0, 16000),
                  std::invalid_argument);
  CHECK_THROWS_AS(init_mel_centers(4, 200.0, 100.0, 16000),
                  std::invalid_argument);
  CHECK_THROWS_AS(init_mel_centers(4, 100.0, 9000.0, 16000),
                  std::invalid_argument);
}

TEST_CASE("kernel values, symmetry and center tap") {
  FilterbankParams p = tiny_params({0.1, 0.25, 0.45}, 65);
  Matrix k = build_kernels(p);
  const int c = (p.kernel_len - 1) / 2;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(k(i, c) == 1.0);
    for (int n = 1; n <= c; ++n) CHECK(k(i, c + n) == k(i, c - n));
  }
  // mu = 0.25, n = 2: cos(pi) exp(-4 * 0.0625 / 2)
  CHECK(k(1, c + 2) == doctest::Approx(-0.8824969025845955).epsilon(1e-14));
}

TEST_CASE("kernel gradient formula and finite differences") {
  FilterbankParams p = tiny_params({0.25}, 33);
  Matrix g = kernel_grad_mu(p);
  const int c = (p.kernel_len - 1) / 2;
  CHECK(g(0, c) == 0.0);
  CHECK(g(0, c + 1) == doctest::Approx(-6.089872018091913).epsilon(1e-12));
  CHECK(g(0, c + 1) == g(0, c - 1));

  // central differences on g(n) at mu = 0.1, n = 5
  FilterbankParams q = tiny_params({0.1}, 33);
  const double h = 1e-6;
  auto eval = [&](double mu, int n) {
    return std::cos(2.0 * std::numbers::pi * mu * n) *
           std::exp(-0.5 * n * n * mu * mu);
  };
  double fd = (eval(0.1 + h, 5) - eval(0.1 - h, 5)) / (2.0 * h);
  Matrix gq = kernel_grad_mu(q);
  CHECK(std::abs(fd - gq(0, c + 5)) / std::abs(fd) < 1e-5);
}

TEST_CASE("forward floors silence at log(eps)") {
  FilterbankParams p = tiny_params({0.05, 0.2}, 33);
  FrameSequence frames = make_frames(Vec(200, 0.0), 100, 50);
  LearnedSpectrogram I = fb_forward(frames, p);
  CHECK(I.values.rows == 2);
  CHECK(I.values.cols == 3);
  for (double v : I.values.v)
    CHECK(v == doctest::Approx(-23.025850929940457).epsilon(1e-14));
}

TEST_CASE("forward peaks at the filter nearest a pure tone") {
  FilterbankParams p;
  p.mu = init_mel_centers(32, 200.0, 7000.0, 16000);
  p.kernel_len = 257;
  const double f0 = 2000.0;
  Vec sig(4000);
  for (std::size_t n = 0; n < sig.size(); ++n)
    sig[n] = std::sin(2.0 * std::numbers::pi * f0 * static_cast<double>(n) /
                      16000.0);
  FrameSequence frames = make_frames(sig, 640, 160);
  LearnedSpectrogram I = fb_forward(frames, p);
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < p.mu.size(); ++i)
    if (std::abs(p.mu[i] - f0 / 16000.0) <
        std::abs(p.mu[nearest] - f0 / 16000.0))
      nearest = i;
  for (std::size_t t = 0; t < I.values.cols; ++t) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < I.values.rows; ++i)
      if (I.values(i, t) > I.values(arg, t)) arg = i;
    CHECK(std::abs(static_cast<long>(arg) - static_cast<long>(nearest)) <= 1);
  }
}

TEST_CASE("scaling a signal by 10 shifts I by 2 ln 10") {
  Rng rng(3);
  Vec sig = testutil::random_vec(500, rng, -0.5, 0.5);
  FilterbankParams p = tiny_params({0.1, 0.3}, 33);
  FrameSequence a = make_frames(sig, 200, 100);
  Vec scaled = sig;
  for (double& x : scaled) x *= 10.0;
  FrameSequence b = make_frames(scaled, 200, 100);
  LearnedSpectrogram Ia = fb_forward(a, p);
  LearnedSpectrogram Ib = fb_forward(b, p);
  for (std::size_t k = 0; k < Ia.values.v.size(); ++k)
    CHECK(Ib.values.v[k] - Ia.values.v[k] ==
          doctest::Approx(4.605170185988092).epsilon(1e-9));
}

TEST_CASE("backward zero and linearity contracts") {
  Rng rng(9);
  FilterbankParams p = tiny_params({0.08, 0.2, 0.35}, 33);
  FrameSequence frames =
      make_frames(testutil::random_vec(300, rng), 100, 50);
  FbCache cache;
  fb_forward(frames, p, &cache);

  Matrix zero(3, cache.num_frames);
  Vec g0 = fb_backward(zero, cache);
  for (double g : g0) CHECK(g == 0.0);

  Matrix grad = testutil::random_matrix(3, cache.num_frames, rng);
  Vec g1 = fb_backward(grad, cache);
  for (double& x : grad.v) x *= 2.0;
  Vec g2 = fb_backward(grad, cache);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g2[i] == 2.0 * g1[i]);
}

TEST_CASE("backward matches finite differences") {
  Rng rng(13);
  for (int trial = 0; trial < 3; ++trial) {
    const std::size_t F = 2;
    FilterbankParams p = tiny_params(
        {rng.uniform(0.05, 0.4), rng.uniform(0.05, 0.4)}, 33);
    Vec sig = testutil::random_vec(260, rng);
    FrameSequence frames = make_frames(sig, 100, 40);
    FbCache cache;
    LearnedSpectrogram I = fb_forward(frames, p, &cache);
    Matrix up = testutil::random_matrix(F, I.values.cols, rng);

    Vec analytic = fb_backward(up, cache);
    auto f = [&](const Vec& mu) {
      FilterbankParams q = p;
      q.mu = mu;
      LearnedSpectrogram out = fb_forward(frames, q);
      double acc = 0.0;
      for (std::size_t k = 0; k < out.values.v.size(); ++k)
        acc += up.v[k] * out.values.v[k];
      return acc;
    };
    CHECK(grad_check(f, p.mu, analytic, 1e-6) < 1e-4);
  }
}

TEST_CASE("frequency response of impulse, peak location, DC rejection") {
  Vec impulse(33, 0.0);
  impulse[16] = 1.0;
  Vec flat = frequency_response(
      std::span<const double>(impulse.data(), impulse.size()), 64);
  for (double m : flat) CHECK(m == doctest::Approx(1.0).epsilon(1e-12));

  const std::size_t n_fft = 4096;
  for (double mu : {0.05, 0.1, 0.2, 0.3, 0.375}) {
    FilterbankParams p = tiny_params({mu}, 257);
    if (257.0 < 10.0 / mu) continue;
    Matrix k = build_kernels(p);
    Vec resp = frequency_response(k.row_span(0), n_fft);
    std::size_t arg = 0;
    for (std::size_t b = 1; b < resp.size(); ++b)
      if (resp[b] > resp[arg]) arg = b;
    CHECK(std::abs(static_cast<double>(arg) - mu * n_fft) <= 1.0);
    // DC response well below the peak once mu * L >= 8
    CHECK(resp[0] < 0.1 * resp[arg]);
  }
}

// The -mu spectral image overlaps the +mu image close to Nyquist, so kernels
// up there stop peaking at their nominal center. Default mel init stays below
// this region; the check documents where it starts.
TEST_CASE("near-Nyquist kernels peak away from mu (image overlap)") {
  const std::size_t n_fft = 4096;
  FilterbankParams p = tiny_params({0.45}, 257);
  Matrix k = build_kernels(p);
  Vec resp = frequency_response(k.row_span(0), n_fft);
  std::size_t arg = 0;
  for (std::size_t b = 1; b < resp.size(); ++b)
    if (resp[b] > resp[arg]) arg = b;
  CHECK(arg == n_fft / 2);  // merged images peak at the Nyquist bin
}

TEST_CASE("constant-Q: 3 dB bandwidth proportional to mu") {
  const std::size_t n_fft = 8192;
  Vec ratios;
  for (double mu = 0.05; mu <= 0.376; mu += 0.025) {
    FilterbankParams p = tiny_params({mu}, 257);
    if (p.kernel_len < 10.0 / mu) continue;
    Matrix k = build_kernels(p);
    Vec resp = frequency_response(k.row_span(0), n_fft);
    double bw = bandwidth_3db(resp, n_fft);
    REQUIRE(std::isfinite(bw));
    ratios.push_back(bw / mu);
  }
  REQUIRE(ratios.size() >= 5);
  double lo = ratios[0], hi = ratios[0];
  for (double r : ratios) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK((hi - lo) / lo < 0.05);
  // Gaussian prediction: bw / mu = sqrt(2 ln 2) / pi
  CHECK(ratios[0] == doctest::Approx(0.2650103635193969).epsilon(0.02));
}

TEST_CASE("forward rejects frames shorter than the kernel") {
  FilterbankParams p = tiny_params({0.1}, 65);
  FrameSequence frames = make_frames(Vec(200, 0.0), 48, 16);
  CHECK_THROWS_AS(fb_forward(frames, p), std::runtime_error);
}
