#include "polaron/simd/kernels.hpp"

namespace polaron::simd {
namespace {

double norm_sq(const cplx* z, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::norm(z[i]);
  return s;
}

double weighted_norm_sq(const double* w, const cplx* z, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * std::norm(z[i]);
  return s;
}

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

double real_dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_real(const double* w, cplx* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] *= w[i];
}

void abs_sq(const cplx* z, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::norm(z[i]);
}

void phase_mul_acc(cplx s, const cplx* p, const cplx* x, cplx* y,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += s * (p[i] * x[i]);
}

void conj_phase_mul_acc(cplx s, const cplx* p, const cplx* x, cplx* y,
                        std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += s * (std::conj(p[i]) * x[i]);
}

void real_mul_acc(double s, const double* v, const cplx* x, cplx* y,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += (s * v[i]) * x[i];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",      norm_sq, weighted_norm_sq,   dot,
      real_dot,      axpy,    scale_real,         abs_sq,
      phase_mul_acc, conj_phase_mul_acc, real_mul_acc};
  return table;
}

}  // namespace polaron::simd
