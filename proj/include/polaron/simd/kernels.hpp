#pragma once
// Data-parallel inner loops shared by every module.
//
// Each kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is chosen once at startup from CPUID; setting
// POLARON_SIMD=scalar in the environment forces the reference path. Both
// tables stay reachable so tests can compare them element by element.

#include <cstddef>
#include <span>
#include <string_view>

#include "polaron/common.hpp"

namespace polaron::simd {

struct KernelTable {
  std::string_view name;
  // sum |z_i|^2
  double (*norm_sq)(const cplx* z, std::size_t n);
  // sum w_i |z_i|^2
  double (*weighted_norm_sq)(const double* w, const cplx* z, std::size_t n);
  // sum conj(a_i) b_i
  cplx (*dot)(const cplx* a, const cplx* b, std::size_t n);
  // sum a_i b_i
  double (*real_dot)(const double* a, const double* b, std::size_t n);
  // y += a x
  void (*axpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
  // z_i *= w_i
  void (*scale_real)(const double* w, cplx* z, std::size_t n);
  // out_i = |z_i|^2
  void (*abs_sq)(const cplx* z, double* out, std::size_t n);
  // y_i += s * p_i * x_i
  void (*phase_mul_acc)(cplx s, const cplx* p, const cplx* x, cplx* y,
                        std::size_t n);
  // y_i += s * conj(p_i) * x_i
  void (*conj_phase_mul_acc)(cplx s, const cplx* p, const cplx* x, cplx* y,
                             std::size_t n);
  // y_i += s * v_i * x_i
  void (*real_mul_acc)(double s, const double* v, const cplx* x, cplx* y,
                       std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the CPU (or the build) lacks AVX2/FMA.
const KernelTable* avx2_table();
const KernelTable& active();

inline double norm_sq(std::span<const cplx> z) {
  return active().norm_sq(z.data(), z.size());
}
inline double weighted_norm_sq(std::span<const double> w,
                               std::span<const cplx> z) {
  return active().weighted_norm_sq(w.data(), z.data(), z.size());
}
inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double real_dot(std::span<const double> a, std::span<const double> b) {
  return active().real_dot(a.data(), b.data(), a.size());
}
inline void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y) {
  active().axpy(a, x.data(), y.data(), y.size());
}
inline void scale_real(std::span<const double> w, std::span<cplx> z) {
  active().scale_real(w.data(), z.data(), z.size());
}
inline void abs_sq(std::span<const cplx> z, std::span<double> out) {
  active().abs_sq(z.data(), out.data(), z.size());
}
inline void phase_mul_acc(cplx s, std::span<const cplx> p,
                          std::span<const cplx> x, std::span<cplx> y) {
  active().phase_mul_acc(s, p.data(), x.data(), y.data(), y.size());
}
inline void conj_phase_mul_acc(cplx s, std::span<const cplx> p,
                               std::span<const cplx> x, std::span<cplx> y) {
  active().conj_phase_mul_acc(s, p.data(), x.data(), y.data(), y.size());
}
inline void real_mul_acc(double s, std::span<const double> v,
                         std::span<const cplx> x, std::span<cplx> y) {
  active().real_mul_acc(s, v.data(), x.data(), y.data(), y.size());
}

}  // namespace polaron::simd
