#include <doctest.h>

#include <random>
#include <vector>

#include "polaron/simd/kernels.hpp"

using polaron::cplx;
using polaron::CVec;
using polaron::RVec;
namespace simd = polaron::simd;

namespace {

struct Inputs {
  CVec a, b, y;
  RVec w, v;
};

Inputs make_inputs(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  Inputs in;
  for (std::size_t i = 0; i < n; ++i) {
    in.a.emplace_back(d(gen), d(gen));
    in.b.emplace_back(d(gen), d(gen));
    in.y.emplace_back(d(gen), d(gen));
    in.w.push_back(d(gen));
    in.v.push_back(d(gen));
  }
  return in;
}

void check_close(cplx x, cplx y, double scale) {
  CHECK(std::abs(x - y) <= 1e-12 * scale);
}

}  // namespace

TEST_CASE("vector kernels agree with the scalar reference") {
  const simd::KernelTable& ref = simd::scalar_table();
  const simd::KernelTable* fast = simd::avx2_table();
  if (fast == nullptr) {
    MESSAGE("AVX2 unavailable; only the scalar table is exercised");
    fast = &ref;
  }
  for (std::size_t n : {0u, 1u, 2u, 3u, 5u, 8u, 17u, 64u, 1001u}) {
    CAPTURE(n);
    const Inputs in = make_inputs(n, 7 + n);
    const double scale = 1.0 + static_cast<double>(n);

    CHECK(fast->norm_sq(in.a.data(), n) ==
          doctest::Approx(ref.norm_sq(in.a.data(), n)).epsilon(1e-13));
    CHECK(fast->weighted_norm_sq(in.w.data(), in.a.data(), n) ==
          doctest::Approx(ref.weighted_norm_sq(in.w.data(), in.a.data(), n))
              .epsilon(1e-12));
    check_close(fast->dot(in.a.data(), in.b.data(), n),
                ref.dot(in.a.data(), in.b.data(), n), scale);
    CHECK(fast->real_dot(in.w.data(), in.v.data(), n) ==
          doctest::Approx(ref.real_dot(in.w.data(), in.v.data(), n))
              .epsilon(1e-12));

    auto compare = [&](auto op) {
      CVec y1 = in.y, y2 = in.y;
      op(ref, y1);
      op(*fast, y2);
      for (std::size_t i = 0; i < n; ++i) check_close(y1[i], y2[i], 10.0);
    };
    const cplx s{0.3, -1.7};
    compare([&](const simd::KernelTable& t, CVec& y) {
      t.axpy(s, in.a.data(), y.data(), n);
    });
    compare([&](const simd::KernelTable& t, CVec& y) {
      t.scale_real(in.w.data(), y.data(), n);
    });
    compare([&](const simd::KernelTable& t, CVec& y) {
      t.phase_mul_acc(s, in.a.data(), in.b.data(), y.data(), n);
    });
    compare([&](const simd::KernelTable& t, CVec& y) {
      t.conj_phase_mul_acc(s, in.a.data(), in.b.data(), y.data(), n);
    });
    compare([&](const simd::KernelTable& t, CVec& y) {
      t.real_mul_acc(-0.4, in.w.data(), in.b.data(), y.data(), n);
    });

    RVec o1(n), o2(n);
    ref.abs_sq(in.a.data(), o1.data(), n);
    fast->abs_sq(in.a.data(), o2.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-14));
  }
}

TEST_CASE("scalar reference kernels compute the documented sums") {
  const simd::KernelTable& ref = simd::scalar_table();
  CVec a{{1.0, 2.0}, {-1.0, 0.5}};
  CVec b{{0.0, 1.0}, {2.0, 0.0}};
  CHECK(ref.norm_sq(a.data(), 2) == doctest::Approx(6.25));
  const cplx d = ref.dot(a.data(), b.data(), 2);
  // conj(1+2i) i + conj(-1+0.5i) 2 = (2 + i) + (-2 - i)
  CHECK(d.real() == doctest::Approx(0.0));
  CHECK(d.imag() == doctest::Approx(0.0));
  CHECK(simd::active().name.size() > 0);
}
