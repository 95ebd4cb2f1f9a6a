#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cosgauss/gradcheck.hpp"
#include "cosgauss/losses.hpp"
#include "cosgauss/nn.hpp"
#include "cosgauss/optim.hpp"
#include "helpers.hpp"

using namespace cosgauss;

TEST_CASE("dense forward identities") {
  Dense zero = Dense::zeros(3, 2);
  Vec y = zero.forward(Vec{1.0, 2.0, 3.0});
  CHECK(y == Vec{0.0, 0.0});

  Dense id = Dense::zeros(3, 3);
  for (std::size_t i = 0; i < 3; ++i) id.W(i, i) = 1.0;
  Vec x{0.5, -0.25, 2.0};
  CHECK(id.forward(x) == x);

  CHECK_THROWS_AS(zero.forward(Vec{1.0}), std::invalid_argument);
}

TEST_CASE("dense backward matches finite differences") {
  Rng rng(1);
  Dense d = Dense::init(4, 3, rng);
  Vec x = testutil::random_vec(4, rng);
  Vec up = testutil::random_vec(3, rng);

  DenseGrad g = zeros_like(d);
  Vec dx;
  dense_backward(d, x, up, &g, &dx);

  auto scalar = [&](const Dense& layer, const Vec& input) {
    Vec y = layer.forward(input);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += up[i] * y[i];
    return acc;
  };
  auto f_w = [&](const Vec& v) {
    Dense dd = d;
    dd.W.v = v;
    return scalar(dd, x);
  };
  CHECK(grad_check(f_w, d.W.v, g.W.v, 1e-6) < 1e-6);
  auto f_x = [&](const Vec& v) { return scalar(d, v); };
  CHECK(grad_check(f_x, x, dx, 1e-6) < 1e-6);
  auto f_b = [&](const Vec& v) {
    Dense dd = d;
    dd.b = v;
    return scalar(dd, x);
  };
  CHECK(grad_check(f_b, d.b, g.b, 1e-6) < 1e-6);
}

TEST_CASE("lstm step zero-parameter algebra") {
  LstmCell cell = LstmCell::zeros(3, 2);
  Vec h, c;
  Vec x{0.7, -0.3, 0.1};
  Vec hp{0.0, 0.0}, cp{0.8, -0.4};
  lstm_step(cell, x, hp, cp, &h, &c);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(c[i] == doctest::Approx(0.5 * cp[i]).epsilon(1e-15));
    CHECK(h[i] == doctest::Approx(0.5 * std::tanh(0.5 * cp[i])).epsilon(1e-15));
  }
  lstm_step(cell, x, {}, {}, &h, &c);
  CHECK(h == Vec{0.0, 0.0});
  CHECK(c == Vec{0.0, 0.0});
}

namespace {

Vec pack_cell(const LstmCell& c) {
  Vec out;
  for (int q = 0; q < 4; ++q)
    out.insert(out.end(), c.W[q].v.begin(), c.W[q].v.end());
  for (int q = 0; q < 4; ++q)
    out.insert(out.end(), c.U[q].v.begin(), c.U[q].v.end());
  for (int q = 0; q < 4; ++q) out.insert(out.end(), c.b[q].begin(), c.b[q].end());
  return out;
}

Vec pack_grad(const LstmGrad& c) {
  Vec out;
  for (int q = 0; q < 4; ++q)
    out.insert(out.end(), c.W[q].v.begin(), c.W[q].v.end());
  for (int q = 0; q < 4; ++q)
    out.insert(out.end(), c.U[q].v.begin(), c.U[q].v.end());
  for (int q = 0; q < 4; ++q) out.insert(out.end(), c.b[q].begin(), c.b[q].end());
  return out;
}

LstmCell unpack_cell(const Vec& v, std::size_t D, std::size_t H) {
  LstmCell c = LstmCell::zeros(D, H);
  std::size_t off = 0;
  for (int q = 0; q < 4; ++q)
    for (auto& x : c.W[q].v) x = v[off++];
  for (int q = 0; q < 4; ++q)
    for (auto& x : c.U[q].v) x = v[off++];
  for (int q = 0; q < 4; ++q)
    for (auto& x : c.b[q]) x = v[off++];
  return c;
}

}  // namespace

TEST_CASE("lstm BPTT matches finite differences over a 5-step sequence") {
  Rng rng(3);
  const std::size_t D = 3, H = 4, T = 5;
  LstmCell cell = LstmCell::init(D, H, rng);
  Matrix X = testutil::random_matrix(T, D, rng);
  Matrix up = testutil::random_matrix(T, H, rng);

  auto scalar = [&](const LstmCell& cv, const Matrix& Xv) {
    Matrix h = lstm_forward_seq(Xv, cv);
    double acc = 0.0;
    for (std::size_t k = 0; k < h.v.size(); ++k) acc += up.v[k] * h.v[k];
    return acc;
  };

  LstmSeqCache cache;
  lstm_forward_seq(X, cell, &cache);
  LstmGrad grad = zeros_like(cell);
  Matrix dX;
  lstm_backward_seq(up, cell, cache, &grad, &dX);

  auto f_params = [&](const Vec& v) { return scalar(unpack_cell(v, D, H), X); };
  CHECK(grad_check(f_params, pack_cell(cell), pack_grad(grad), 1e-6) < 1e-4);

  auto f_x = [&](const Vec& v) {
    Matrix Xv = X;
    Xv.v = v;
    return scalar(cell, Xv);
  };
  CHECK(grad_check(f_x, X.v, dX.v, 1e-6) < 1e-4);
}

TEST_CASE("bilstm degenerate, reversal and zero cases") {
  Rng rng(4);
  const std::size_t D = 3, H = 2;
  BiLstm layer = BiLstm::init(D, H, rng);

  Matrix one = testutil::random_matrix(1, D, rng);
  Matrix out = bilstm_forward(one, layer);
  Vec hf, cf, hb, cb;
  lstm_step(layer.fwd, one.row_span(0), {}, {}, &hf, &cf);
  lstm_step(layer.bwd, one.row_span(0), {}, {}, &hb, &cb);
  for (std::size_t i = 0; i < H; ++i) {
    CHECK(out(0, i) == hf[i]);
    CHECK(out(0, H + i) == hb[i]);
  }

  // reversing the input swaps the roles of the two cells
  Matrix X = testutil::random_matrix(6, D, rng);
  Matrix fwd_out = bilstm_forward(X, layer);
  BiLstm swapped;
  swapped.fwd = layer.bwd;
  swapped.bwd = layer.fwd;
  Matrix rev_out = bilstm_forward(reverse_rows(X), swapped);
  for (std::size_t t = 0; t < 6; ++t)
    for (std::size_t i = 0; i < H; ++i) {
      CHECK(rev_out(5 - t, H + i) == doctest::Approx(fwd_out(t, i)).epsilon(1e-14));
      CHECK(rev_out(5 - t, i) == doctest::Approx(fwd_out(t, H + i)).epsilon(1e-14));
    }

  BiLstm zeros = BiLstm::zeros(D, H);
  Matrix z = bilstm_forward(X, zeros);
  for (double x : z.v) CHECK(x == 0.0);

  Matrix empty(0, D);
  CHECK_THROWS_AS(bilstm_forward(empty, layer), std::runtime_error);
}

TEST_CASE("bce loss values and gradients") {
  BceResult even = bce_loss(0.0, 1);
  CHECK(even.loss == doctest::Approx(0.6931471805599453).epsilon(1e-15));

  BceResult hit = bce_loss(40.0, 1);
  CHECK(hit.loss == doctest::Approx(0.0).epsilon(1e-12));
  BceResult miss = bce_loss(-40.0, 0);
  CHECK(miss.loss == doctest::Approx(0.0).epsilon(1e-12));

  BceResult r = bce_loss(2.0, 0);
  CHECK(r.loss == doctest::Approx(2.1269280110429727).epsilon(1e-14));
  CHECK(r.dlogit == doctest::Approx(0.8807970779778823).epsilon(1e-14));

  // finite for extreme logits
  CHECK(std::isfinite(bce_loss(1e4, 0).loss));
  CHECK(std::isfinite(bce_loss(-1e4, 1).loss));
}

TEST_CASE("info_nce loss values and gradients") {
  Vec negs10(10, 1.5);
  InfoNceResult uni = info_nce_loss(1.5, negs10);
  CHECK(uni.loss == doctest::Approx(2.3978952727983707).epsilon(1e-14));
  CHECK(!uni.positive_wins);

  InfoNceResult sat = info_nce_loss(100.0, Vec{0.0, 1.0, -2.0});
  CHECK(sat.loss == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sat.positive_wins);

  InfoNceResult r = info_nce_loss(1.0, Vec{0.0, 0.0});
  CHECK(r.loss == doctest::Approx(0.5514447139320509).epsilon(1e-14));

  // gradients sum to zero (softmax minus one-hot)
  double s = r.dpos;
  for (double g : r.dnegs) s += g;
  CHECK(s == doctest::Approx(0.0).epsilon(1e-14));

  CHECK(std::isfinite(info_nce_loss(1e4, Vec{-1e4, 1e4}).loss));
}

TEST_CASE("adam zero gradients leave parameters unchanged") {
  Vec params{1.0, -2.0, 3.0};
  Vec grads{0.0, 0.0, 0.0};
  ParamRefs p{{"w", params.data(), {3}}};
  ParamRefs g{{"w", grads.data(), {3}}};
  AdamState st;
  for (int i = 0; i < 5; ++i) adam_update(p, g, st);
  CHECK(params == Vec{1.0, -2.0, 3.0});
}

TEST_CASE("adam first step has magnitude close to lr") {
  for (double g0 : {0.5, -3.0, 1e-4}) {
    Vec params{1.0};
    Vec grads{g0};
    ParamRefs p{{"w", params.data(), {1}}};
    ParamRefs g{{"w", grads.data(), {1}}};
    AdamState st;
    st.lr = 1e-3;
    adam_update(p, g, st);
    double moved = 1.0 - params[0];
    CHECK(std::abs(moved) == doctest::Approx(1e-3).epsilon(1e-3));
    CHECK(moved * g0 > 0.0);  // moves against the gradient sign
  }
}

TEST_CASE("adam trajectories are bit-identical across runs") {
  auto run = [] {
    Rng rng(17);
    Vec params = testutil::random_vec(8, rng);
    AdamState st;
    ParamRefs p{{"w", params.data(), {8}}};
    for (int i = 0; i < 50; ++i) {
      Vec grads(8);
      for (std::size_t k = 0; k < 8; ++k)
        grads[k] = std::sin(0.1 * i + static_cast<double>(k)) * params[k];
      ParamRefs g{{"w", grads.data(), {8}}};
      adam_update(p, g, st);
    }
    return params;
  };
  CHECK(run() == run());
}

TEST_CASE("adam freeze skips matching groups") {
  Vec a{1.0}, b{2.0};
  Vec ga{1.0}, gb{1.0};
  ParamRefs p{{"fb.mu", a.data(), {1}}, {"head.W", b.data(), {1}}};
  ParamRefs g{{"fb.mu", ga.data(), {1}}, {"head.W", gb.data(), {1}}};
  AdamState st;
  adam_update(p, g, st,
              [](const std::string& n) { return n.rfind("fb.", 0) == 0; });
  CHECK(a[0] == 1.0);
  CHECK(b[0] != 2.0);
}

TEST_CASE("grad_check behavior on quadratic, linear and corrupted gradients") {
  Vec x{0.3, -1.2, 2.0};
  auto quad = [](const Vec& v) {
    double acc = 0.0;
    for (double a : v) acc += a * a;
    return acc;
  };
  Vec grad_quad{2.0 * x[0], 2.0 * x[1], 2.0 * x[2]};
  CHECK(grad_check(quad, x, grad_quad, 1e-4) < 1e-7);

  auto lin = [](const Vec& v) { return 2.0 * v[0] - v[1] + 0.5 * v[2]; };
  Vec grad_lin{2.0, -1.0, 0.5};
  CHECK(grad_check(lin, x, grad_lin, 1e-4) < 1e-10);

  Vec corrupted = grad_quad;
  for (double& g : corrupted) g *= 1.01;
  CHECK(grad_check(quad, x, corrupted, 1e-4) >= 0.009);

  auto bad = [](const Vec&) { return std::numeric_limits<double>::infinity(); };
  CHECK_THROWS_AS(grad_check(bad, x, grad_lin, 1e-4), std::runtime_error);
}
