#include "polaron/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define POLARON_HAVE_X86 1
#include <immintrin.h>
#else
#define POLARON_HAVE_X86 0
#endif

namespace polaron::simd {

#if POLARON_HAVE_X86
namespace {

#define AVX2_FN __attribute__((target("avx2,fma"))) static inline

// Two complex numbers per register, interleaved (re, im, re, im).
AVX2_FN __m256d load2(const cplx* p) {
  return _mm256_loadu_pd(reinterpret_cast<const double*>(p));
}
AVX2_FN void store2(cplx* p, __m256d v) {
  _mm256_storeu_pd(reinterpret_cast<double*>(p), v);
}
// [w0, w0, w1, w1]
AVX2_FN __m256d expand2(const double* w) {
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(w)), 0x50);
}
AVX2_FN __m256d cmul(__m256d p, __m256d x) {
  const __m256d pr = _mm256_movedup_pd(p);
  const __m256d pi = _mm256_permute_pd(p, 0xF);
  const __m256d xs = _mm256_permute_pd(x, 0x5);
  return _mm256_fmaddsub_pd(pr, x, _mm256_mul_pd(pi, xs));
}
AVX2_FN __m256d cmul_conj(__m256d p, __m256d x) {
  const __m256d pr = _mm256_movedup_pd(p);
  const __m256d pi = _mm256_permute_pd(p, 0xF);
  const __m256d xs = _mm256_permute_pd(x, 0x5);
  return _mm256_fmsubadd_pd(pr, x, _mm256_mul_pd(pi, xs));
}
AVX2_FN __m256d cscale(__m256d sr, __m256d si, __m256d t) {
  return _mm256_fmaddsub_pd(sr, t, _mm256_mul_pd(si, _mm256_permute_pd(t, 0x5)));
}
AVX2_FN double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

__attribute__((target("avx2,fma"))) double norm_sq(const cplx* z,
                                                   std::size_t n) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x0 = load2(z + i), x1 = load2(z + i + 2);
    a0 = _mm256_fmadd_pd(x0, x0, a0);
    a1 = _mm256_fmadd_pd(x1, x1, a1);
  }
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += std::norm(z[i]);
  return s;
}

__attribute__((target("avx2,fma"))) double weighted_norm_sq(const double* w,
                                                            const cplx* z,
                                                            std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d x = load2(z + i);
    acc = _mm256_fmadd_pd(expand2(w + i), _mm256_mul_pd(x, x), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * std::norm(z[i]);
  return s;
}

__attribute__((target("avx2,fma"))) cplx dot(const cplx* a, const cplx* b,
                                             std::size_t n) {
  __m256d re = _mm256_setzero_pd(), im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d x = load2(a + i), y = load2(b + i);
    re = _mm256_fmadd_pd(x, y, re);
    // (ar*bi, ai*br, ...)
    im = _mm256_fmadd_pd(x, _mm256_permute_pd(y, 0x5), im);
  }
  alignas(32) double r[4], m[4];
  _mm256_store_pd(r, re);
  _mm256_store_pd(m, im);
  double sr = (r[0] + r[1]) + (r[2] + r[3]);
  double si = (m[0] - m[1]) + (m[2] - m[3]);
  for (; i < n; ++i) {
    sr += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    si += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {sr, si};
}

__attribute__((target("avx2,fma"))) double real_dot(const double* a,
                                                    const double* b,
                                                    std::size_t n) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4),
                         a1);
  }
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

__attribute__((target("avx2,fma"))) void axpy(cplx a, const cplx* x, cplx* y,
                                              std::size_t n) {
  const __m256d sr = _mm256_set1_pd(a.real()), si = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    store2(y + i, _mm256_add_pd(load2(y + i), cscale(sr, si, load2(x + i))));
  for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2,fma"))) void scale_real(const double* w, cplx* z,
                                                    std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    store2(z + i, _mm256_mul_pd(expand2(w + i), load2(z + i)));
  for (; i < n; ++i) z[i] *= w[i];
}

__attribute__((target("avx2,fma"))) void abs_sq(const cplx* z, double* out,
                                                std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x0 = load2(z + i), x1 = load2(z + i + 2);
    const __m256d h =
        _mm256_hadd_pd(_mm256_mul_pd(x0, x0), _mm256_mul_pd(x1, x1));
    _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(h, 0xD8));
  }
  for (; i < n; ++i) out[i] = std::norm(z[i]);
}

__attribute__((target("avx2,fma"))) void phase_mul_acc(cplx s, const cplx* p,
                                                       const cplx* x, cplx* y,
                                                       std::size_t n) {
  const __m256d sr = _mm256_set1_pd(s.real()), si = _mm256_set1_pd(s.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d t = cmul(load2(p + i), load2(x + i));
    store2(y + i, _mm256_add_pd(load2(y + i), cscale(sr, si, t)));
  }
  for (; i < n; ++i) y[i] += s * (p[i] * x[i]);
}

__attribute__((target("avx2,fma"))) void conj_phase_mul_acc(cplx s,
                                                            const cplx* p,
                                                            const cplx* x,
                                                            cplx* y,
                                                            std::size_t n) {
  const __m256d sr = _mm256_set1_pd(s.real()), si = _mm256_set1_pd(s.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d t = cmul_conj(load2(p + i), load2(x + i));
    store2(y + i, _mm256_add_pd(load2(y + i), cscale(sr, si, t)));
  }
  for (; i < n; ++i) y[i] += s * (std::conj(p[i]) * x[i]);
}

__attribute__((target("avx2,fma"))) void real_mul_acc(double s,
                                                      const double* v,
                                                      const cplx* x, cplx* y,
                                                      std::size_t n) {
  const __m256d ss = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d w = _mm256_mul_pd(ss, expand2(v + i));
    store2(y + i, _mm256_fmadd_pd(w, load2(x + i), load2(y + i)));
  }
  for (; i < n; ++i) y[i] += (s * v[i]) * x[i];
}

#undef AVX2_FN

}  // namespace

const KernelTable* avx2_table() {
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  if (!supported) return nullptr;
  static const KernelTable table{
      "avx2",        norm_sq, weighted_norm_sq,   dot,
      real_dot,      axpy,    scale_real,         abs_sq,
      phase_mul_acc, conj_phase_mul_acc, real_mul_acc};
  return &table;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace polaron::simd
