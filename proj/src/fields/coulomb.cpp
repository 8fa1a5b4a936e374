#include "polaron/coulomb.hpp"

#include <fftw3.h>

#include <cmath>
#include <list>
#include <utility>

#include "polaron/fft.hpp"
#include "polaron/potentials.hpp"
#include "polaron/simd/kernels.hpp"

namespace polaron {

struct CoulombOperator::Scratch {
  RVec rows;  // padded x-rows for the occupied (y, z) block
  CVec spec;  // half spectrum of the padded box
};

struct CoulombOperator::Plans {
  fftw_plan rows_forward = nullptr;
  fftw_plan y_forward = nullptr;
  fftw_plan z_forward = nullptr;
  fftw_plan z_backward = nullptr;
  fftw_plan y_backward = nullptr;
  fftw_plan rows_backward = nullptr;

  ~Plans() {
    std::lock_guard lock(fft::planner_mutex());
    for (fftw_plan p : {rows_forward, y_forward, z_forward, z_backward,
                        y_backward, rows_backward})
      if (p != nullptr) fftw_destroy_plan(p);
  }
};

namespace {

fftw_complex* fc(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

void check_plan(fftw_plan p) {
  if (p == nullptr) throw Error("FFTW failed to create a pruned plan");
}

}  // namespace

CoulombOperator::CoulombOperator(const Grid3D& grid)
    : grid_(grid),
      padded_(grid.padded_points()),
      k0_(cell_average_inverse_distance(grid.spacing())),
      plans_(std::make_unique<Plans>()) {
  const int n = grid_.points();
  const int m = padded_;
  const int mh = m / 2 + 1;
  const double h = grid_.spacing();
  const fft::Dims pdims{m, m, m};

  {
    RVec kernel(fft::volume(pdims));
    for (int iz = 0; iz < m; ++iz) {
      const int dz = iz < n ? iz : iz - m;
      for (int iy = 0; iy < m; ++iy) {
        const int dy = iy < n ? iy : iy - m;
        for (int ix = 0; ix < m; ++ix) {
          const int dx = ix < n ? ix : ix - m;
          const double r2 = static_cast<double>(dx) * dx +
                            static_cast<double>(dy) * dy +
                            static_cast<double>(dz) * dz;
          kernel[ix + static_cast<std::size_t>(m) * (iy + static_cast<std::size_t>(m) * iz)] =
              r2 == 0.0 ? k0_ : 1.0 / (h * std::sqrt(r2));
        }
      }
    }
    CVec spec(fft::half_volume(pdims));
    fft::r2c(pdims, kernel.data(), spec.data());
    const double scale = h * h * h / static_cast<double>(fft::volume(pdims));
    kernel_hat_.resize(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i)
      kernel_hat_[i] = spec[i].real() * scale;
  }

  auto s = std::make_unique<Scratch>();
  s->rows.assign(static_cast<std::size_t>(m) * n * n, 0.0);
  s->spec.assign(static_cast<std::size_t>(mh) * m * m, cplx{0.0, 0.0});
  double* rows = s->rows.data();
  fftw_complex* spec = fc(s->spec.data());
  const unsigned flags = FFTW_ESTIMATE;
  const int plane = mh * m;

  std::lock_guard lock(fft::planner_mutex());
  {
    fftw_iodim dim{m, 1, 1};
    fftw_iodim many[2] = {{n, m, mh}, {n, m * n, plane}};
    plans_->rows_forward =
        fftw_plan_guru_dft_r2c(1, &dim, 2, many, rows, spec, flags);
    check_plan(plans_->rows_forward);
    fftw_iodim back_many[2] = {{n, mh, m}, {n, plane, m * n}};
    plans_->rows_backward =
        fftw_plan_guru_dft_c2r(1, &dim, 2, back_many, spec, rows, flags);
    check_plan(plans_->rows_backward);
  }
  {
    fftw_iodim dim{m, mh, mh};
    fftw_iodim many[2] = {{mh, 1, 1}, {n, plane, plane}};
    plans_->y_forward = fftw_plan_guru_dft(1, &dim, 2, many, spec, spec,
                                           FFTW_FORWARD, flags);
    check_plan(plans_->y_forward);
    plans_->y_backward = fftw_plan_guru_dft(1, &dim, 2, many, spec, spec,
                                            FFTW_BACKWARD, flags);
    check_plan(plans_->y_backward);
  }
  {
    fftw_iodim dim{m, plane, plane};
    fftw_iodim many[2] = {{mh, 1, 1}, {m, mh, mh}};
    plans_->z_forward = fftw_plan_guru_dft(1, &dim, 2, many, spec, spec,
                                           FFTW_FORWARD, flags);
    check_plan(plans_->z_forward);
    plans_->z_backward = fftw_plan_guru_dft(1, &dim, 2, many, spec, spec,
                                            FFTW_BACKWARD, flags);
    check_plan(plans_->z_backward);
  }
  pool_.push_back(std::move(s));
}

CoulombOperator::~CoulombOperator() = default;

std::unique_ptr<CoulombOperator::Scratch> CoulombOperator::acquire() const {
  {
    std::lock_guard lock(pool_mutex_);
    if (!pool_.empty()) {
      auto s = std::move(pool_.back());
      pool_.pop_back();
      return s;
    }
  }
  const int n = grid_.points();
  const int m = padded_;
  auto s = std::make_unique<Scratch>();
  s->rows.assign(static_cast<std::size_t>(m) * n * n, 0.0);
  s->spec.assign(static_cast<std::size_t>(m / 2 + 1) * m * m, cplx{0.0, 0.0});
  return s;
}

void CoulombOperator::release(std::unique_ptr<Scratch> s) const {
  std::lock_guard lock(pool_mutex_);
  pool_.push_back(std::move(s));
}

void CoulombOperator::potential(std::span<const double> rho,
                                std::span<double> out) const {
  const int n = grid_.points();
  if (rho.size() != grid_.size() || out.size() != grid_.size())
    throw ValidationError("density does not match the Coulomb grid");
  const std::size_t sn = static_cast<std::size_t>(n);
  const std::size_t m = static_cast<std::size_t>(padded_);
  auto s = acquire();
  double* rows = s->rows.data();
  for (std::size_t r = 0; r < sn * sn; ++r) {
    std::copy_n(rho.data() + r * sn, sn, rows + r * m);
    std::fill_n(rows + r * m + sn, m - sn, 0.0);
  }
  std::fill(s->spec.begin(), s->spec.end(), cplx{0.0, 0.0});
  fftw_complex* spec = fc(s->spec.data());
  fftw_execute_dft_r2c(plans_->rows_forward, rows, spec);
  fftw_execute_dft(plans_->y_forward, spec, spec);
  fftw_execute_dft(plans_->z_forward, spec, spec);
  simd::scale_real(kernel_hat_, s->spec);
  fftw_execute_dft(plans_->z_backward, spec, spec);
  fftw_execute_dft(plans_->y_backward, spec, spec);
  fftw_execute_dft_c2r(plans_->rows_backward, spec, rows);
  for (std::size_t r = 0; r < sn * sn; ++r)
    std::copy_n(rows + r * m, sn, out.data() + r * sn);
  release(std::move(s));
}

RVec CoulombOperator::potential(std::span<const double> rho) const {
  RVec out(grid_.size());
  potential(rho, out);
  return out;
}

void CoulombOperator::potential(std::span<const cplx> g,
                                std::span<cplx> out) const {
  const std::size_t total = grid_.size();
  if (g.size() != total || out.size() != total)
    throw ValidationError("density does not match the Coulomb grid");
  RVec part(total), w(total);
  for (std::size_t i = 0; i < total; ++i) part[i] = g[i].real();
  potential(part, w);
  for (std::size_t i = 0; i < total; ++i) out[i] = cplx{w[i], 0.0};
  bool has_imag = false;
  for (std::size_t i = 0; i < total; ++i) {
    part[i] = g[i].imag();
    has_imag = has_imag || part[i] != 0.0;
  }
  if (!has_imag) return;
  potential(part, w);
  for (std::size_t i = 0; i < total; ++i) out[i] += cplx{0.0, w[i]};
}

double CoulombOperator::pair_energy(std::span<const double> a,
                                    std::span<const double> b) const {
  const RVec w = potential(b);
  return simd::real_dot(a, w) * grid_.cell_volume();
}

cplx CoulombOperator::pair_energy(std::span<const cplx> a,
                                  std::span<const cplx> b) const {
  CVec w(grid_.size());
  potential(b, w);
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < w.size(); ++i) s += a[i] * w[i];
  return s * grid_.cell_volume();
}

std::shared_ptr<const CoulombOperator> CoulombOperator::shared(
    const Grid3D& grid) {
  static std::mutex mutex;
  static std::list<std::shared_ptr<const CoulombOperator>> cache;
  constexpr std::size_t kMaxEntries = 4;
  std::lock_guard lock(mutex);
  for (auto it = cache.begin(); it != cache.end(); ++it) {
    const Grid3D& g = (*it)->grid();
    if (g.points() == grid.points() &&
        std::abs(g.extent() - grid.extent()) <= 1e-12 * grid.extent()) {
      cache.splice(cache.begin(), cache, it);
      return cache.front();
    }
  }
  cache.push_front(std::make_shared<const CoulombOperator>(grid));
  if (cache.size() > kMaxEntries) cache.pop_back();
  return cache.front();
}

double coulomb_self_energy(const RealField3D& rho) {
  double mass = 0.0;
  for (double v : rho.values) {
    if (v < 0.0) throw ValidationError("density must be non-negative");
    mass += v;
  }
  mass *= rho.grid.cell_volume();
  if (std::abs(mass - 1.0) > 1e-8)
    throw ValidationError("density must have unit mass (got " +
                          std::to_string(mass) + ")");
  return CoulombOperator::shared(rho.grid)->pair_energy(rho.values,
                                                        rho.values);
}

}  // namespace polaron
