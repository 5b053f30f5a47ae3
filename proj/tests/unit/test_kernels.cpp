#include <cmath>
#include <vector>

#include "doctest.h"
#include "retrorank/numcore/autodiff.hpp"
#include "retrorank/numcore/kernels.hpp"
#include "retrorank/numcore/prng.hpp"

using namespace retrorank;

namespace {

std::vector<double> random_vec(Prng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

// RAII pin of the active kernel table.
struct IsaGuard {
  explicit IsaGuard(kernels::Isa isa) : saved(kernels::active_isa()) { kernels::select(isa); }
  ~IsaGuard() { kernels::select(saved); }
  kernels::Isa saved;
};

}  // namespace

TEST_CASE("scalar kernels match textbook loops") {
  const auto& s = kernels::scalar_table();
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(s.dot(a.data(), b.data(), 3) == 32.0);
  std::vector<double> y{1, 1, 1};
  s.axpy(2.0, a.data(), y.data(), 3);
  CHECK(y == std::vector<double>{3, 5, 7});
  s.mul_acc(a.data(), b.data(), y.data(), 3);
  CHECK(y == std::vector<double>{7, 15, 25});
  std::vector<double> w{1, 0, 0, 0, 1, 0}, out(2);
  s.gemv(w.data(), a.data(), out.data(), 2, 3);
  CHECK(out == std::vector<double>{1, 2});
}

TEST_CASE("avx2 kernels agree with scalar reference across lengths and tails") {
  const kernels::KernelTable* v = kernels::avx2_table();
  if (!v) {
    MESSAGE("AVX2 unavailable; equivalence skipped");
    return;
  }
  const auto& s = kernels::scalar_table();
  Prng rng(7);
  for (std::size_t n = 0; n <= 67; ++n) {
    auto a = random_vec(rng, n), b = random_vec(rng, n), y0 = random_vec(rng, n);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(s.dot(a.data(), b.data(), n) - v->dot(a.data(), b.data(), n)) <= 1e-14 * (mag + 1.0));

    auto ys = y0, yv = y0;
    s.axpy(0.37, a.data(), ys.data(), n);
    v->axpy(0.37, a.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ys[i] - yv[i]) <= 1e-15 * (std::abs(ys[i]) + 1.0));

    ys = y0;
    yv = y0;
    s.mul_acc(a.data(), b.data(), ys.data(), n);
    v->mul_acc(a.data(), b.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ys[i] - yv[i]) <= 1e-15 * (std::abs(ys[i]) + 4.0));
  }
  for (std::size_t rows : {1u, 3u, 8u}) {
    for (std::size_t cols : {1u, 5u, 16u, 33u}) {
      auto w = random_vec(rng, rows * cols), x = random_vec(rng, cols);
      std::vector<double> ys(rows), yv(rows);
      s.gemv(w.data(), x.data(), ys.data(), rows, cols);
      v->gemv(w.data(), x.data(), yv.data(), rows, cols);
      for (std::size_t r = 0; r < rows; ++r) CHECK(std::abs(ys[r] - yv[r]) <= 1e-13);
    }
  }
}

TEST_CASE("tensor ops give equivalent results under either kernel table") {
  if (!kernels::available(kernels::Isa::Avx2)) return;
  Prng rng(11);
  Tensor in(Shape{2, 9, 7}), k(Shape{3, 2, 3, 3}), a(Shape{5, 13}), b(Shape{13, 6});
  for (Tensor* t : {&in, &k, &a, &b}) {
    for (double& x : t->data()) x = rng.uniform(-1.0, 1.0);
  }
  auto run = [&](kernels::Isa isa) {
    IsaGuard guard(isa);
    ad::Tape tape;
    ad::Var vin = tape.constant(in), vk = tape.constant(k);
    ad::Var conv = ad::conv2d_maxpool(vin, vk);
    ad::Var mm = ad::matmul(tape.constant(a), tape.constant(b));
    return std::pair{conv.value(), mm.value()};
  };
  auto [conv_s, mm_s] = run(kernels::Isa::Scalar);
  auto [conv_v, mm_v] = run(kernels::Isa::Avx2);
  REQUIRE(conv_s.shape() == conv_v.shape());
  for (std::size_t i = 0; i < conv_s.size(); ++i) CHECK(std::abs(conv_s[i] - conv_v[i]) <= 1e-13);
  for (std::size_t i = 0; i < mm_s.size(); ++i) CHECK(std::abs(mm_s[i] - mm_v[i]) <= 1e-13);
}

TEST_CASE("select rejects nothing for scalar and reports names") {
  CHECK(kernels::available(kernels::Isa::Scalar));
  CHECK(std::string(kernels::isa_name(kernels::Isa::Avx2)) == "avx2");
  IsaGuard guard(kernels::Isa::Scalar);
  CHECK(kernels::active_isa() == kernels::Isa::Scalar);
}
