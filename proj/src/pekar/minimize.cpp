// Riemannian preconditioned nonlinear conjugate gradients on the unit sphere.
//
// Every quantity the line search needs is polynomial in the step t before
// normalization: with b = 2 Re(conj(phi) d) and c = |d|^2 the density of
// phi + t d is |phi|^2 + t b + t^2 c, so D is a quartic and T, V quadratics.
// One iteration therefore costs two interaction potentials (W[b], W[c]) and
// one kinetic application; the state's own potentials are updated linearly
// and recomputed from scratch every kRefreshInterval iterations.

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "polaron/pekar.hpp"
#include "polaron/simd/kernels.hpp"

namespace polaron::pekar {
namespace {

constexpr int kRefreshInterval = 25;
constexpr int kEnergyWindow = 10;

double re_inner(std::span<const cplx> a, std::span<const cplx> b, double dv) {
  return simd::dot(a, b).real() * dv;
}

struct State {
  CVec phi, kphi;  // phi and D_A^2 phi
  RVec w;          // W[|phi|^2]
  double kinetic = 0.0, potential = 0.0, coulomb = 0.0;
};

class Descent {
 public:
  Descent(const PekarEvaluator& eval, const MinimizeOptions& opts)
      : eval_(eval),
        opts_(opts),
        grid_(eval.problem().grid),
        alpha_(eval.problem().alpha),
        dv_(grid_.cell_volume()),
        box_scale_(std::pow(2.0 * kPi / grid_.extent(), 2)) {}

  PekarSolution run(CVec start);

 private:
  void refresh(State& s) const;
  double total(const State& s) const {
    return s.kinetic + s.potential - alpha_ * s.coulomb;
  }

  const PekarEvaluator& eval_;
  const MinimizeOptions& opts_;
  const Grid3D& grid_;
  double alpha_;
  double dv_;
  double box_scale_;
};

void Descent::refresh(State& s) const {
  const double nrm = std::sqrt(simd::norm_sq(s.phi) * dv_);
  for (auto& v : s.phi) v /= nrm;
  s.kphi.resize(s.phi.size());
  eval_.kinetic().apply(s.phi, s.kphi);
  s.kinetic = re_inner(s.phi, s.kphi, dv_);
  s.potential = simd::weighted_norm_sq(eval_.potential(), s.phi) * dv_;
  s.w.assign(s.phi.size(), 0.0);
  s.coulomb = 0.0;
  if (alpha_ != 0.0) {
    RVec rho(s.phi.size());
    simd::abs_sq(s.phi, rho);
    eval_.interaction().potential(rho, s.w);
    s.coulomb = simd::real_dot(rho, s.w) * dv_;
  }
}

PekarSolution Descent::run(CVec start) {
  const std::size_t size = grid_.size();
  const RVec& vext = eval_.potential();
  State s;
  s.phi = std::move(start);
  refresh(s);

  PekarSolution sol(grid_);
  sol.alpha = alpha_;
  sol.trace.emplace_back(0, total(s));

  CVec g(size), r(size), z(size), z_prev(size), r_prev(size), d(size),
      kd(size);
  RVec b(size), c(size), wb(size), wc(size);
  double rz_prev = 0.0;
  bool have_direction = false;
  double step_guess = 1.0;
  std::deque<double> window{total(s)};
  int since_refresh = 0;
  int it = 0;
  double rel_res = 0.0, err_est = 0.0, lambda = 0.0;

  for (;; ++it) {
    // Gradient pieces at the current state.
    for (std::size_t i = 0; i < size; ++i)
      g[i] = s.kphi[i] + (vext[i] - 2.0 * alpha_ * s.w[i]) * s.phi[i];
    lambda = re_inner(s.phi, g, dv_);
    for (std::size_t i = 0; i < size; ++i) r[i] = g[i] - lambda * s.phi[i];
    const double res = std::sqrt(simd::norm_sq(r) * dv_);
    const double scale = std::max(s.kinetic, 0.0) + std::abs(lambda) + box_scale_;
    rel_res = res / scale;
    std::copy(r.begin(), r.end(), z.begin());
    eval_.kinetic().precondition(z, scale);
    const double zp = re_inner(s.phi, z, dv_);
    simd::axpy(cplx{-zp, 0.0}, s.phi, z);
    const double rz = re_inner(r, z, dv_);
    err_est = std::max(rz, 0.0);

    const double energy = total(s);
    const bool window_ok =
        static_cast<int>(window.size()) > kEnergyWindow &&
        std::abs(window.front() - energy) <=
            std::max(opts_.tolerance * opts_.tolerance, 1e-15) * scale;
    if (rel_res < opts_.tolerance && (window_ok || res == 0.0)) {
      if (since_refresh == 0) {
        sol.converged = true;
        break;
      }
      refresh(s);
      since_refresh = 0;
      --it;
      continue;
    }
    if (it >= opts_.max_iterations) break;

    // Polak-Ribiere+ with the previous direction moved to the new tangent.
    double beta = 0.0;
    if (have_direction && rz_prev > 0.0) {
      double num = rz;
      num -= re_inner(r, z_prev, dv_);
      beta = std::max(0.0, num / rz_prev);
    }
    if (beta > 0.0) {
      const double dp = re_inner(s.phi, d, dv_);
      for (std::size_t i = 0; i < size; ++i)
        d[i] = -z[i] + beta * (d[i] - dp * s.phi[i]);
    } else {
      for (std::size_t i = 0; i < size; ++i) d[i] = -z[i];
    }
    double slope = 2.0 * re_inner(r, d, dv_);
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < size; ++i) d[i] = -z[i];
      slope = 2.0 * re_inner(r, d, dv_);
    }
    std::copy(z.begin(), z.end(), z_prev.begin());
    rz_prev = rz;
    have_direction = true;
    if (!(slope < 0.0)) {  // zero preconditioned residual
      sol.converged = rel_res < opts_.tolerance;
      break;
    }

    // Energy along phi(t) = (phi + t d) / |phi + t d|.
    eval_.kinetic().apply(d, kd);
    const double k1 = re_inner(s.phi, kd, dv_);
    const double k2 = re_inner(d, kd, dv_);
    double p1 = 0.0, p2 = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      p1 += vext[i] * (std::conj(s.phi[i]) * d[i]).real();
      p2 += vext[i] * std::norm(d[i]);
    }
    p1 *= dv_;
    p2 *= dv_;
    const double n1 = re_inner(s.phi, d, dv_);
    const double n2 = simd::norm_sq(d) * dv_;
    double d1 = 0.0, d2 = 0.0, d3 = 0.0, d4 = 0.0;
    if (alpha_ != 0.0) {
      for (std::size_t i = 0; i < size; ++i) {
        b[i] = 2.0 * (std::conj(s.phi[i]) * d[i]).real();
        c[i] = std::norm(d[i]);
      }
      eval_.interaction().potential(b, wb);
      eval_.interaction().potential(c, wc);
      const double ab = simd::real_dot(b, s.w) * dv_;
      const double ac = simd::real_dot(c, s.w) * dv_;
      const double bb = simd::real_dot(b, wb) * dv_;
      const double bc = simd::real_dot(b, wc) * dv_;
      const double cc = simd::real_dot(c, wc) * dv_;
      d1 = 2.0 * ab;
      d2 = bb + 2.0 * ac;
      d3 = 2.0 * bc;
      d4 = cc;
    }
    const double t0k = s.kinetic, t0p = s.potential, t0d = s.coulomb;
    auto parts = [&](double t, double& kin, double& pot, double& cou,
                     double& norm2) {
      norm2 = 1.0 + 2.0 * t * n1 + t * t * n2;
      kin = (t0k + 2.0 * t * k1 + t * t * k2) / norm2;
      pot = (t0p + 2.0 * t * p1 + t * t * p2) / norm2;
      cou = (t0d + t * (d1 + t * (d2 + t * (d3 + t * d4)))) / (norm2 * norm2);
    };
    auto energy_at = [&](double t) {
      double kin, pot, cou, nn;
      parts(t, kin, pot, cou, nn);
      return kin + pot - alpha_ * cou;
    };

    const double e0 = energy;
    double t = step_guess;
    double et = energy_at(t);
    double lo = 0.0, hi = 0.0;
    if (et < e0) {
      int grow = 0;
      while (grow++ < 60) {
        const double e2 = energy_at(2.0 * t);
        if (!(e2 < et)) break;
        t *= 2.0;
        et = e2;
      }
      lo = t / 2.0;
      hi = 2.0 * t;
    } else {
      int shrink = 0;
      while (!(et < e0) && shrink++ < 60) {
        t *= 0.5;
        et = energy_at(t);
      }
      lo = 0.0;
      hi = 2.0 * t;
    }
    if (!(et < e0)) {
      if (beta > 0.0) {
        have_direction = false;
        --it;
        continue;
      }
      if (since_refresh != 0) {
        refresh(s);
        since_refresh = 0;
        have_direction = false;
        --it;
        continue;
      }
      // No decrease along the preconditioned gradient: rounding floor.
      sol.converged = rel_res < opts_.tolerance;
      break;
    }
    const auto [tb, eb] =
        boost::math::tools::brent_find_minima(energy_at, lo, hi, 40);
    if (eb < et) {
      t = tb;
      et = eb;
    }
    step_guess = t;

    // Linear update of the state and its potentials.
    double kin, pot, cou, nn;
    parts(t, kin, pot, cou, nn);
    const double inv = 1.0 / std::sqrt(nn);
    for (std::size_t i = 0; i < size; ++i) {
      s.phi[i] = (s.phi[i] + t * d[i]) * inv;
      s.kphi[i] = (s.kphi[i] + t * kd[i]) * inv;
    }
    if (alpha_ != 0.0)
      for (std::size_t i = 0; i < size; ++i)
        s.w[i] = (s.w[i] + t * wb[i] + t * t * wc[i]) / nn;
    s.kinetic = kin;
    s.potential = pot;
    s.coulomb = cou;
    if (++since_refresh >= kRefreshInterval) {
      refresh(s);
      since_refresh = 0;
    }
    sol.trace.emplace_back(it + 1, total(s));
    window.push_back(total(s));
    while (static_cast<int>(window.size()) > kEnergyWindow + 1)
      window.pop_front();
  }

  if (since_refresh != 0) refresh(s);
  sol.energy = total(s);
  sol.kinetic = s.kinetic;
  sol.potential = s.potential;
  sol.coulomb = s.coulomb;
  sol.phi = ComplexField3D(grid_, std::move(s.phi));
  sol.projected_residual = rel_res;
  sol.energy_error_estimate = err_est;
  sol.multiplier = lambda;
  sol.iterations = it;
  return sol;
}

CVec perturbed_start(const Grid3D& grid, const GaussianFamilyOptimum& opt,
                     int restart, std::uint64_t seed) {
  static constexpr double kWidthFactors[] = {1.0, 0.5, 2.0, 0.7, 1.4};
  const double a =
      opt.width_parameter * kWidthFactors[restart % std::size(kWidthFactors)];
  std::mt19937_64 gen(seed * 1000003ULL + static_cast<std::uint64_t>(restart));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double sigma = 0.5 / std::sqrt(a);
  Vec3 center = opt.center, wave{};
  for (int j = 0; j < 3; ++j) {
    center[j] += 0.25 * sigma * u(gen);
    wave[j] = 0.5 * u(gen) / sigma;
  }
  ComplexField3D f = gaussian_state(grid, a, center);
  for (std::size_t i = 0; i < grid.size(); ++i)
    f.values[i] *= std::polar(1.0, dot3(wave, grid.node(i)));
  f.normalize();
  return std::move(f.values);
}

}  // namespace

PekarSolution minimize_pekar(const PekarProblem& problem,
                             const MinimizeOptions& opts) {
  if (!(opts.tolerance > 0.0))
    throw ValidationError("solver tolerance must be positive");
  if (opts.max_iterations < 0 || opts.restarts < 0)
    throw ValidationError("iteration and restart counts must be >= 0");
  const PekarEvaluator eval(problem);
  const Grid3D& grid = problem.grid;

  std::optional<GaussianFamilyOptimum> family;
  auto family_opt = [&]() -> const GaussianFamilyOptimum& {
    if (!family) family = gaussian_family_minimum(problem.pair, problem.alpha, &grid);
    return *family;
  };

  if (opts.initializer == Initializer::kGaussianFamily) {
    const auto& opt = family_opt();
    ComplexField3D phi = gaussian_state(grid, opt.width_parameter, opt.center);
    const EnergyBreakdown e = eval.energy(phi.values);
    PekarSolution sol(grid);
    sol.phi = phi;
    sol.energy = e.total;
    sol.kinetic = e.kinetic;
    sol.potential = e.potential;
    sol.coulomb = e.coulomb;
    sol.alpha = problem.alpha;
    sol.converged = true;
    sol.trace.emplace_back(0, e.total);
    return sol;
  }

  CVec first;
  if (opts.initializer == Initializer::kProvided) {
    if (!opts.start) throw ValidationError("provided initializer without a state");
    ComplexField3D f = resample(*opts.start, grid);
    f.normalize();
    first = std::move(f.values);
  } else {
    const auto& opt = family_opt();
    first = gaussian_state(grid, opt.width_parameter, opt.center).values;
  }

  Descent descent(eval, opts);
  PekarSolution best = descent.run(std::move(first));
  for (int k = 1; k <= opts.restarts; ++k) {
    PekarSolution trial =
        descent.run(perturbed_start(grid, family_opt(), k, opts.seed));
    trial.restart_index = k;
    const double tie = 1e-12 * std::max(1.0, std::abs(best.energy));
    const bool better =
        trial.energy < best.energy - tie ||
        (std::abs(trial.energy - best.energy) <= tie &&
         trial.projected_residual < best.projected_residual);
    if (better) best = std::move(trial);
  }
  return best;
}

}  // namespace polaron::pekar
