#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "retrorank/numcore/autodiff.hpp"
#include "retrorank/numcore/errors.hpp"
#include "retrorank/numcore/gradcheck.hpp"
#include "retrorank/numcore/prng.hpp"

using namespace retrorank;
using ad::Tape;
using ad::Var;

namespace {

Tensor random_tensor(Prng& rng, Shape shape, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& x : t.data()) x = rng.uniform(-scale, scale);
  return t;
}

// Triple-loop product in plain doubles.
Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  const std::size_t p = a.dim(0), q = a.dim(1), r = b.dim(1);
  Tensor c(Shape{p, r}, 0.0);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < q; ++k) s += a.at(i, k) * b.at(k, j);
      c.at(i, j) = s;
    }
  return c;
}

// Direct nested-loop convolution with explicit bounds checks for padding,
// then pooling by scanning each window.
Tensor naive_conv_pool(const Tensor& in, const Tensor& k) {
  const std::size_t c = in.dim(0), h = in.dim(1), w = in.dim(2), f = k.dim(0);
  auto px = [&](std::size_t ch, long y, long x) {
    if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w)) return 0.0;
    return in[(ch * h + y) * w + x];
  };
  std::vector<double> conv(f * h * w, 0.0);
  for (std::size_t fi = 0; fi < f; ++fi)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        double s = 0.0;
        for (std::size_t ch = 0; ch < c; ++ch)
          for (long dy = -1; dy <= 1; ++dy)
            for (long dx = -1; dx <= 1; ++dx)
              s += k[((fi * c + ch) * 3 + (dy + 1)) * 3 + (dx + 1)] * px(ch, static_cast<long>(y) + dy, static_cast<long>(x) + dx);
        conv[(fi * h + y) * w + x] = s;
      }
  const std::size_t oh = (h + 1) / 2, ow = (w + 1) / 2;
  Tensor out(Shape{f, oh, ow}, 0.0);
  for (std::size_t fi = 0; fi < f; ++fi)
    for (std::size_t py = 0; py < oh; ++py)
      for (std::size_t pxi = 0; pxi < ow; ++pxi) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t y = 2 * py; y < std::min(h, 2 * py + 2); ++y)
          for (std::size_t x = 2 * pxi; x < std::min(w, 2 * pxi + 2); ++x) m = std::max(m, conv[(fi * h + y) * w + x]);
        out[(fi * oh + py) * ow + pxi] = m;
      }
  return out;
}

}  // namespace

TEST_CASE("matmul examples") {
  Tape tape;
  Var eye = tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
  Var m = tape.constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  CHECK(ad::matmul(eye, m).value() == Tensor::matrix(2, 2, {1, 2, 3, 4}));

  Var row = tape.constant(Tensor::matrix(1, 2, {1, 0}));
  Var col = tape.constant(Tensor::matrix(2, 1, {0, 5}));
  CHECK(ad::matmul(row, col).value() == Tensor::matrix(1, 1, {0}));

  Prng rng(3);
  Tensor a = random_tensor(rng, {3, 4}), b = random_tensor(rng, {4, 2});
  Tensor got = ad::matmul(tape.constant(a), tape.constant(b)).value();
  Tensor want = naive_matmul(a, b);
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));

  try {
    ad::matmul(tape.constant(Tensor(Shape{2, 3})), tape.constant(Tensor(Shape{2, 3})));
    FAIL("expected dimension error");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("[2x3] x [2x3]") != std::string::npos);
  }
}

TEST_CASE("sigmoid values, saturation and symmetry") {
  Tape tape;
  CHECK(ad::sigmoid(tape.constant(Tensor::scalar(0.0))).item() == 0.5);
  const double neg = ad::sigmoid(tape.constant(Tensor::scalar(-50.0))).item();
  CHECK(neg > 0.0);
  CHECK(neg < 1e-21);
  // 1 / (1 + e^-1) to 17 significant digits.
  CHECK(ad::sigmoid(tape.constant(Tensor::scalar(1.0))).item() == doctest::Approx(0.73105857863000488).epsilon(1e-15));

  Prng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-36.0, 36.0);
    const double s = ad::stable_sigmoid(x);
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    CHECK(std::abs(s + ad::stable_sigmoid(-x) - 1.0) <= 1e-12);
  }
  for (double x : {-800.0, -100.0, 100.0, 800.0}) {
    const double s = ad::stable_sigmoid(x);
    CHECK(std::isfinite(s));
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("elementwise suite") {
  Tape tape;
  CHECK(ad::sq_norm(tape.constant(Tensor::vector({0, 0, 0}))).item() == 0.0);
  CHECK(ad::sq_norm(tape.constant(Tensor::vector({3, 4}))).item() == 25.0);
  const Var parts[] = {tape.constant(Tensor::vector({1, 2})), tape.constant(Tensor::vector({3, 4, 5}))};
  Var cat = ad::concat(parts, 0);
  CHECK(cat.value() == Tensor::vector({1, 2, 3, 4, 5}));
  CHECK(ad::slice(cat, 0, 1, 3).value() == Tensor::vector({2, 3, 4}));
  CHECK(ad::sum(cat).item() == 15.0);

  // concat along the second axis of matrices
  const Var mats[] = {tape.constant(Tensor::matrix(2, 1, {1, 2})), tape.constant(Tensor::matrix(2, 2, {3, 4, 5, 6}))};
  CHECK(ad::concat(mats, 1).value() == Tensor::matrix(2, 3, {1, 3, 4, 2, 5, 6}));

  CHECK_THROWS_AS(ad::add(tape.constant(Tensor::vector({1})), tape.constant(Tensor::vector({1, 2}))), DimensionError);
  CHECK_THROWS_AS(ad::slice(cat, 0, 4, 2), DimensionError);
}

TEST_CASE("conv2d_maxpool examples") {
  Tape tape;
  Tensor zero_in(Shape{2, 5, 3}, 0.0);
  Prng rng(9);
  Tensor k = random_tensor(rng, {4, 2, 3, 3});
  Var out = ad::conv2d_maxpool(tape.constant(zero_in), tape.constant(k));
  CHECK(out.shape() == Shape{4, 3, 2});
  for (double v : out.value().data()) CHECK(v == 0.0);

  // identity-center kernel: the single 2x2 window pools the input max
  Tensor center(Shape{1, 1, 3, 3}, 0.0);
  center[4] = 1.0;
  Var single = ad::conv2d_maxpool(tape.constant(Tensor(Shape{1, 2, 2}, {0.3, -1.0, 2.5, 0.7})), tape.constant(center));
  CHECK(single.shape() == Shape{1, 1, 1});
  CHECK(single.item() == 2.5);

  Tensor in = random_tensor(rng, {1, 4, 4});
  Tensor k2 = random_tensor(rng, {2, 1, 3, 3});
  Tensor got = ad::conv2d_maxpool(tape.constant(in), tape.constant(k2)).value();
  Tensor want = naive_conv_pool(in, k2);
  REQUIRE(got.shape() == want.shape());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-13));

  // odd edges pool over the remaining strip
  Tensor odd = random_tensor(rng, {2, 5, 7});
  Tensor k3 = random_tensor(rng, {3, 2, 3, 3});
  Tensor got_odd = ad::conv2d_maxpool(tape.constant(odd), tape.constant(k3)).value();
  Tensor want_odd = naive_conv_pool(odd, k3);
  for (std::size_t i = 0; i < want_odd.size(); ++i) CHECK(got_odd[i] == doctest::Approx(want_odd[i]).epsilon(1e-13));

  CHECK_THROWS_AS(ad::conv2d_maxpool(tape.constant(in), tape.constant(Tensor(Shape{2, 3, 3, 3}))), DimensionError);
}

TEST_CASE("backward examples and contract") {
  ParamStore ps;
  Parameter& w = ps.add("w", Tensor::vector({3, 4}));
  {
    Tape tape;
    Var loss = ad::sq_norm(tape.param(w));
    tape.backward(loss);
    CHECK(w.grad == Tensor::vector({6, 8}));
    CHECK_THROWS_AS(tape.backward(loss), GraphError);
    tape.zero_grad();
    CHECK(w.grad == Tensor::vector({0, 0}));
    tape.backward(loss);
    CHECK(w.grad == Tensor::vector({6, 8}));
  }
  ps.zero_grad();
  {
    Parameter& v = ps.add("v", Tensor::vector({0, 0, 0}));
    Tape tape;
    Tensor x = Tensor::vector({1, -2, 0.5});
    Var loss = ad::sigmoid(ad::dot(tape.param(v), tape.constant(x)));
    tape.backward(loss);
    for (std::size_t i = 0; i < 3; ++i) CHECK(v.grad[i] == doctest::Approx(0.25 * x[i]).epsilon(1e-15));
  }
  {
    Tape tape;
    Var nonscalar = ad::scale(tape.param(w), 2.0);
    CHECK_THROWS_AS(tape.backward(nonscalar), GraphError);
  }
}

TEST_CASE("every op passes central finite differences") {
  Prng rng(21);
  ParamStore ps;
  Parameter& a = ps.add("a", random_tensor(rng, {3, 4}));
  Parameter& b = ps.add("b", random_tensor(rng, {4, 2}));
  Parameter& x = ps.add("x", random_tensor(rng, {4}));
  Parameter& y = ps.add("y", random_tensor(rng, {4}));
  Parameter& table = ps.add("table", random_tensor(rng, {5, 3}));
  Parameter& img = ps.add("img", random_tensor(rng, {2, 5, 4}));
  Parameter& ker = ps.add("ker", random_tensor(rng, {3, 2, 3, 3}));
  const std::vector<int> ids{1, 3, 0, 3};

  auto loss = [&](Tape& t) {
    Var va = t.param(a), vb = t.param(b), vx = t.param(x), vy = t.param(y);
    Var mm = ad::matmul(va, vb);                              // 3x2
    Var mv = ad::matvec(va, ad::tanh(vx));                    // 3
    Var tr = ad::transpose(mm);                               // 2x3
    Var s1 = ad::sum(ad::mul(ad::sigmoid(mv), ad::slice(ad::reshape(tr, {6}), 0, 2, 3)));
    Var s2 = ad::dot(ad::sub(vx, vy), ad::add(vx, ad::scale(vy, 0.5)));
    Var rows = ad::gather_rows(t.param(table), ids);          // 4x3
    const Var stacked_parts[] = {ad::slice(vx, 0, 0, 3), ad::slice(vy, 0, 1, 3)};
    Var stacked = ad::stack_rows(stacked_parts, 4);           // 4x3
    Var s3 = ad::sq_norm(ad::mul(rows, stacked));
    const Var cat_parts[] = {vx, mv};
    Var s4 = ad::sq_norm(ad::tanh(ad::concat(cat_parts, 0)));
    Var pooled = ad::conv2d_maxpool(t.param(img), t.param(ker));
    Var s5 = ad::sum(ad::tanh(pooled));
    Var s6 = ad::bce_with_logits(s1, 1.0);
    Var s7 = ad::bce_with_logits(s2, 0.0);
    const Var terms[] = {ad::reshape(s1, {1}), ad::reshape(s2, {1}), ad::reshape(s3, {1}), ad::reshape(s4, {1}),
                         ad::reshape(s5, {1}), ad::reshape(s6, {1}), ad::reshape(s7, {1})};
    return ad::sum(ad::concat(terms, 0));
  };
  GradCheckReport r = check_gradients(ps, loss);
  INFO("worst: " << r.worst.param << "[" << r.worst.index << "] analytic=" << r.worst.analytic
                 << " numeric=" << r.worst.numeric);
  CHECK(r.max_rel_error < 1e-4);
  CHECK(r.checked == ps.scalar_count());
  // PAD row of the table never receives gradient
  ps.zero_grad();
  Tape t;
  t.backward(loss(t));
  for (std::size_t c = 0; c < 3; ++c) CHECK(table.grad.at(0, c) == 0.0);
}

TEST_CASE("backward is linear over summed losses") {
  Prng rng(4);
  ParamStore ps;
  Parameter& w = ps.add("w", random_tensor(rng, {3, 3}));
  Parameter& v = ps.add("v", random_tensor(rng, {3}));
  auto l1 = [&](Tape& t) { return ad::sq_norm(ad::tanh(ad::matvec(t.param(w), t.param(v)))); };
  auto l2 = [&](Tape& t) { return ad::sum(ad::sigmoid(ad::matvec(t.param(w), ad::scale(t.param(v), -1.5)))); };

  ps.zero_grad();
  { Tape t; t.backward(l1(t)); }
  Tensor gw1 = w.grad, gv1 = v.grad;
  ps.zero_grad();
  { Tape t; t.backward(l2(t)); }
  Tensor gw2 = w.grad, gv2 = v.grad;
  ps.zero_grad();
  { Tape t; t.backward(ad::add(l1(t), l2(t))); }
  for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(w.grad[i] - (gw1[i] + gw2[i])) <= 1e-12);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(v.grad[i] - (gv1[i] + gv2[i])) <= 1e-12);
}

TEST_CASE("ops are deterministic bit for bit") {
  auto run = [] {
    Prng rng(99);
    Tape t;
    Var a = t.constant(random_tensor(rng, {4, 6}));
    Var b = t.constant(random_tensor(rng, {6, 5}));
    Var img = t.constant(random_tensor(rng, {2, 6, 6}));
    Var k = t.constant(random_tensor(rng, {2, 2, 3, 3}));
    return std::pair{ad::tanh(ad::matmul(a, b)).value(), ad::conv2d_maxpool(img, k).value()};
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite results are rejected") {
  Tape t;
  Var big = t.constant(Tensor::vector({1e200, 1e200}));
  CHECK_THROWS_AS(ad::sq_norm(big), NumericError);
}
