#include "polaron/kinetic.hpp"

#include <cmath>

#include "polaron/fft.hpp"
#include "polaron/simd/kernels.hpp"

namespace polaron {
namespace {

// Calls f(base, stride) for every grid line parallel to `axis`.
template <class F>
void for_each_line(int n, int axis, F&& f) {
  const std::size_t sn = static_cast<std::size_t>(n);
  for (std::size_t a = 0; a < sn; ++a)
    for (std::size_t b = 0; b < sn; ++b) {
      switch (axis) {
        case 0:
          f(sn * (a + sn * b), std::size_t{1});
          break;
        case 1:
          f(a + sn * sn * b, sn);
          break;
        default:
          f(a + sn * b, sn * sn);
          break;
      }
    }
}

// Multiplies a spectrum by sym[m_axis] along one axis.
void multiply_axis(std::span<cplx> data, int n, int axis,
                   const std::vector<double>& sym) {
  const std::size_t sn = static_cast<std::size_t>(n);
  for (std::size_t iz = 0; iz < sn; ++iz)
    for (std::size_t iy = 0; iy < sn; ++iy) {
      cplx* row = data.data() + sn * (iy + sn * iz);
      if (axis == 0) {
        for (std::size_t ix = 0; ix < sn; ++ix) row[ix] *= sym[ix];
      } else {
        const double s = sym[axis == 1 ? iy : iz];
        for (std::size_t ix = 0; ix < sn; ++ix) row[ix] *= s;
      }
    }
}

void multiply_sum(std::span<cplx> data, int n, const std::vector<double>& sym,
                  double shift, bool invert) {
  const std::size_t sn = static_cast<std::size_t>(n);
  for (std::size_t iz = 0; iz < sn; ++iz)
    for (std::size_t iy = 0; iy < sn; ++iy) {
      cplx* row = data.data() + sn * (iy + sn * iz);
      const double yz = shift + sym[iy] + sym[iz];
      for (std::size_t ix = 0; ix < sn; ++ix) {
        const double s = yz + sym[ix];
        row[ix] *= invert ? 1.0 / s : s;
      }
    }
}

constexpr double kFirst[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
constexpr double kSecond[5] = {1.0 / 12, -16.0 / 12, 30.0 / 12, -16.0 / 12,
                               1.0 / 12};

// out[line] (+)= scale * sum_o c[o] in[p + o - 2], zero outside the box.
void stencil(std::span<const cplx> in, std::span<cplx> out, int n, int axis,
             const double (&c)[5], cplx scale, bool accumulate) {
  for_each_line(n, axis, [&](std::size_t base, std::size_t stride) {
    for (int p = 0; p < n; ++p) {
      cplx acc{0.0, 0.0};
      for (int o = 0; o < 5; ++o) {
        const int q = p + o - 2;
        if (q < 0 || q >= n || c[o] == 0.0) continue;
        acc += c[o] * in[base + stride * static_cast<std::size_t>(q)];
      }
      cplx& dst = out[base + stride * static_cast<std::size_t>(p)];
      dst = accumulate ? dst + scale * acc : scale * acc;
    }
  });
}

}  // namespace

KineticOperator::KineticOperator(const Grid3D& grid,
                                 const VectorPotentialSpec& a)
    : KineticOperator(grid, sample(a, grid)) {}

KineticOperator::KineticOperator(const Grid3D& grid, std::array<RVec, 3> a)
    : grid_(grid), a_(std::move(a)) {
  const int n = grid_.points();
  for (int j = 0; j < 3; ++j) {
    if (a_[j].size() != grid_.size())
      throw ValidationError("vector potential does not match the grid");
    for (double v : a_[j])
      if (v != 0.0) {
        active_axes_.push_back(j);
        break;
      }
  }
  k1_.resize(n);
  k2_.resize(n);
  precond_k2_.resize(n);
  const double h = grid_.spacing();
  for (int m = 0; m < n; ++m) {
    const double k = grid_.wavenumber(m);
    k1_[m] = (2 * m == n) ? 0.0 : k;
    k2_[m] = k * k;
    if (grid_.boundary() == Boundary::kPeriodic) {
      precond_k2_[m] = k2_[m];
    } else {
      const double t = 2.0 * kPi * m / n;
      precond_k2_[m] =
          (30.0 - 32.0 * std::cos(t) + 2.0 * std::cos(2.0 * t)) / (12.0 * h * h);
    }
  }
}

void KineticOperator::derivative(int axis, std::span<const cplx> phi,
                                 std::span<cplx> out) const {
  const int n = grid_.points();
  if (grid_.boundary() == Boundary::kPeriodic) {
    const auto dims = grid_.dims();
    CVec spec(phi.size());
    fft::forward(dims, phi.data(), spec.data());
    multiply_axis(spec, n, axis, k1_);
    fft::backward(dims, spec.data(), out.data());
    const double inv = 1.0 / static_cast<double>(phi.size());
    for (auto& v : out) v *= inv;
  } else {
    // -i d/dx
    stencil(phi, out, n, axis, kFirst, cplx{0.0, -1.0 / grid_.spacing()},
            false);
  }
}

void KineticOperator::laplacian(std::span<const cplx> phi,
                                std::span<cplx> out) const {
  // out = -Laplacian phi
  const int n = grid_.points();
  const double h = grid_.spacing();
  for (int axis = 0; axis < 3; ++axis)
    stencil(phi, out, n, axis, kSecond, cplx{1.0 / (h * h), 0.0}, axis > 0);
}

void KineticOperator::apply(std::span<const cplx> phi,
                            std::span<cplx> out) const {
  if (phi.size() != grid_.size() || out.size() != grid_.size())
    throw ValidationError("field does not match the kinetic operator grid");
  const int n = grid_.points();
  const std::size_t total = grid_.size();
  if (grid_.boundary() == Boundary::kPeriodic) {
    const auto dims = grid_.dims();
    const double inv = 1.0 / static_cast<double>(total);
    CVec spec(total), acc(total), tmp(total);
    fft::forward(dims, phi.data(), spec.data());
    std::copy(spec.begin(), spec.end(), acc.begin());
    multiply_sum(acc, n, k2_, 0.0, false);
    CVec local(total, cplx{0.0, 0.0});
    for (int j : active_axes_) {
      // A_j (-i d_j phi)
      std::copy(spec.begin(), spec.end(), tmp.begin());
      multiply_axis(tmp, n, j, k1_);
      CVec dphi(total);
      fft::backward(dims, tmp.data(), dphi.data());
      simd::real_mul_acc(inv, a_[j], dphi, local);
      // A_j^2 phi
      for (std::size_t i = 0; i < total; ++i)
        local[i] += a_[j][i] * a_[j][i] * phi[i];
      // -i d_j (A_j phi), accumulated in the spectral sum
      for (std::size_t i = 0; i < total; ++i) dphi[i] = a_[j][i] * phi[i];
      fft::forward(dims, dphi.data(), tmp.data());
      multiply_axis(tmp, n, j, k1_);
      simd::axpy(cplx{1.0, 0.0}, tmp, acc);
    }
    fft::backward(dims, acc.data(), out.data());
    for (std::size_t i = 0; i < total; ++i) out[i] = out[i] * inv + local[i];
    return;
  }
  laplacian(phi, out);
  if (active_axes_.empty()) return;
  CVec d(total), ap(total);
  for (int j : active_axes_) {
    derivative(j, phi, d);
    for (std::size_t i = 0; i < total; ++i)
      out[i] += a_[j][i] * (d[i] + a_[j][i] * phi[i]);
    for (std::size_t i = 0; i < total; ++i) ap[i] = a_[j][i] * phi[i];
    derivative(j, ap, d);
    simd::axpy(cplx{1.0, 0.0}, d, out);
  }
}

double KineticOperator::energy(std::span<const cplx> phi) const {
  if (phi.size() != grid_.size())
    throw ValidationError("field does not match the kinetic operator grid");
  const int n = grid_.points();
  const std::size_t total = grid_.size();
  const double dv = grid_.cell_volume();
  double e = 0.0;
  if (grid_.boundary() == Boundary::kPeriodic) {
    const auto dims = grid_.dims();
    const double inv = 1.0 / static_cast<double>(total);
    CVec spec(total);
    fft::forward(dims, phi.data(), spec.data());
    const std::size_t sn = static_cast<std::size_t>(n);
    double lap = 0.0;
    for (std::size_t iz = 0; iz < sn; ++iz)
      for (std::size_t iy = 0; iy < sn; ++iy) {
        const cplx* row = spec.data() + sn * (iy + sn * iz);
        const double yz = k2_[iy] + k2_[iz];
        double s = 0.0;
        for (std::size_t ix = 0; ix < sn; ++ix)
          s += (yz + k2_[ix]) * std::norm(row[ix]);
        lap += s;
      }
    e = lap * inv * dv;
    CVec tmp(total), dphi(total);
    for (int j : active_axes_) {
      std::copy(spec.begin(), spec.end(), tmp.begin());
      multiply_axis(tmp, n, j, k1_);
      fft::backward(dims, tmp.data(), dphi.data());
      double cross_term = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < total; ++i) {
        const double a = a_[j][i];
        cross_term += a * (std::conj(phi[i]) * dphi[i]).real();
        sq += a * a * std::norm(phi[i]);
      }
      e += (2.0 * cross_term * inv + sq) * dv;
    }
    return e;
  }
  CVec out(total);
  apply(phi, out);
  return simd::dot(phi, out).real() * dv;
}

void KineticOperator::precondition(std::span<cplx> r, double sigma) const {
  const auto dims = grid_.dims();
  const std::size_t total = grid_.size();
  CVec spec(total);
  fft::forward(dims, r.data(), spec.data());
  multiply_sum(spec, grid_.points(), precond_k2_, sigma, true);
  fft::backward(dims, spec.data(), r.data());
  const double inv = 1.0 / static_cast<double>(total);
  for (auto& v : r) v *= inv;
}

double kinetic_energy(const ComplexField3D& phi, const VectorPotentialSpec& a) {
  return KineticOperator(phi.grid, a).energy(phi.values);
}

double potential_energy(const ComplexField3D& phi,
                        const ScalarPotentialSpec& v) {
  if (is_zero(v)) return 0.0;
  const RVec values = sample(v, phi.grid);
  return simd::weighted_norm_sq(values, phi.values) * phi.grid.cell_volume();
}

}  // namespace polaron
