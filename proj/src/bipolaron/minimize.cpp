// Alternating minimization of the separable Pekar-Tomasevich functional.
//
// Factor phase: preconditioned Polak-Ribiere+ over all factors at once. Along
// f_k + t d_k the overlaps, one-body matrix elements and pair products are
// quadratic in t, so the norm, one-body and repulsion numerators are quartics
// and D(rho, rho) is an octic. One iteration costs the potentials of the
// linear and quadratic pair products plus four density potentials; the stored
// potentials then follow the step exactly.
//
// Coefficient phase: with the factors fixed the energy is a rational function
// of c with the quartic D(rho_c, rho_c) precomputed as a small tensor. The
// stationarity condition (A - alpha B(c)) c = lambda S c is iterated as a
// frozen-density generalized eigenproblem, each step damped by an exact line
// search.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <deque>
#include <limits>

#include "bipolaron/state.hpp"
#include "polaron/simd/kernels.hpp"

namespace polaron::bipolaron {
namespace {

using detail::pair_count;
using detail::pair_index;
using detail::pair_weight;

constexpr int kEnergyWindow = 10;

using Quad = std::array<cplx, 3>;  // a0 + a1 t + a2 t^2

std::array<cplx, 5> mul(const Quad& a, const Quad& b) {
  std::array<cplx, 5> out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i + j] += a[i] * b[j];
  return out;
}

template <std::size_t K>
double eval(const std::array<double, K>& p, double t) {
  double acc = 0.0;
  for (std::size_t i = K; i-- > 0;) acc = acc * t + p[i];
  return acc;
}

double re_inner(const std::vector<CVec>& a, const std::vector<CVec>& b, double dv) {
  double acc = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) acc += simd::dot(a[m], b[m]).real();
  return acc * dv;
}

// Line search along f + t d; owns the direction's potentials until applied.
struct Line {
  std::vector<CVec> kd;          // D_A^2 d
  std::vector<CVec> w1, w2;      // W[g1], W[g2] per pair
  std::array<RVec, 5> wrho;      // W[rho_i], wrho[0] unused
  std::array<double, 5> norm{}, one_body{}, kinetic{}, repulsion{};
  std::array<double, 9> attraction{};

  double energy(double t, double alpha) const {
    const double n = eval(norm, t);
    if (!(n > 0.0)) return std::numeric_limits<double>::infinity();
    return (eval(one_body, t) + eval(repulsion, t)) / n -
           alpha * eval(attraction, t) / (n * n);
  }
};

void build_line(const detail::State& s, const detail::Context& ctx,
                const std::vector<CVec>& d, Line& line) {
  const int r = s.rank();
  const std::size_t n = ctx.grid.size();
  const double dv = ctx.grid.cell_volume();
  line.kd.assign(r, CVec(n));
  for (int k = 0; k < r; ++k) ctx.kinetic.apply(d[k], line.kd[k]);
  const bool rep = ctx.U != 0.0;
  if (rep) {
    line.w1.assign(pair_count(r), CVec(n));
    line.w2.assign(pair_count(r), CVec(n));
  }
  std::array<RVec, 5> rho;
  for (auto& v : rho) v.assign(n, 0.0);
  line.norm = line.one_body = line.kinetic = line.repulsion = {};
  line.attraction = {};

  CVec g0(n), g1(n), g2(n);
  for (int k = 0; k < r; ++k)
    for (int l = k; l < r; ++l) {
      const CVec& fk = s.f[k];
      const CVec& fl = s.f[l];
      const CVec& dk = d[k];
      const CVec& dl = d[l];
      const std::size_t kl = static_cast<std::size_t>(k) * r + l;
      const Quad G{s.G[kl], (simd::dot(fk, dl) + simd::dot(dk, fl)) * dv,
                   simd::dot(dk, dl) * dv};
      const Quad T{s.T[kl],
                   (simd::dot(fk, line.kd[l]) + simd::dot(dk, s.kf[l])) * dv,
                   simd::dot(dk, line.kd[l]) * dv};
      cplx v1{0.0, 0.0}, v2{0.0, 0.0};
      for (std::size_t i = 0; i < n; ++i) {
        const double vi = ctx.potential[i];
        v1 += vi * (std::conj(fk[i]) * dl[i] + std::conj(dk[i]) * fl[i]);
        v2 += vi * std::conj(dk[i]) * dl[i];
      }
      const Quad V{s.Vm[kl], v1 * dv, v2 * dv};
      const Quad H{T[0] + V[0], T[1] + V[1], T[2] + V[2]};
      const double cc = pair_weight(k, l) * s.c[k] * s.c[l];
      const auto GG = mul(G, G), HG = mul(H, G), TG = mul(T, G);
      for (int i = 0; i < 5; ++i) {
        line.norm[i] += cc * GG[i].real();
        line.one_body[i] += 2.0 * cc * HG[i].real();
        line.kinetic[i] += 2.0 * cc * TG[i].real();
      }

      for (std::size_t i = 0; i < n; ++i) {
        g0[i] = std::conj(fk[i]) * fl[i];
        g1[i] = std::conj(fk[i]) * dl[i] + std::conj(dk[i]) * fl[i];
        g2[i] = std::conj(dk[i]) * dl[i];
      }
      const cplx coef = 2.0 * cc;
      for (std::size_t i = 0; i < n; ++i) {
        const Quad gq{g0[i], g1[i], g2[i]};
        const auto prod = mul(G, gq);
        for (int j = 0; j < 5; ++j) rho[j][i] += (coef * prod[j]).real();
      }
      if (rep) {
        const int p = pair_index(r, k, l);
        ctx.coulomb.potential(g1, line.w1[p]);
        ctx.coulomb.potential(g2, line.w2[p]);
        const CVec& w0 = s.wg[p];
        const cplx d00 = detail::bilinear(g0, w0, dv);
        const cplx d01 = detail::bilinear(g0, line.w1[p], dv);
        const cplx d02 = detail::bilinear(g0, line.w2[p], dv);
        const cplx d11 = detail::bilinear(g1, line.w1[p], dv);
        const cplx d12 = detail::bilinear(g1, line.w2[p], dv);
        const cplx d22 = detail::bilinear(g2, line.w2[p], dv);
        const std::array<cplx, 5> dp{d00, 2.0 * d01, 2.0 * d02 + d11, 2.0 * d12,
                                     d22};
        for (int i = 0; i < 5; ++i) line.repulsion[i] += ctx.U * cc * dp[i].real();
      }
    }
  for (int i = 1; i < 5; ++i) {
    line.wrho[i].assign(n, 0.0);
    ctx.coulomb.potential(rho[i], line.wrho[i]);
  }
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const RVec& wj = j == 0 ? s.w : line.wrho[j];
      line.attraction[i + j] += simd::real_dot(rho[i], wj) * dv;
    }
}

void apply_step(detail::State& s, const detail::Context& ctx,
                const std::vector<CVec>& d, const Line& line, double t) {
  const int r = s.rank();
  for (int k = 0; k < r; ++k) {
    simd::axpy(cplx{t, 0.0}, d[k], s.f[k]);
    simd::axpy(cplx{t, 0.0}, line.kd[k], s.kf[k]);
  }
  if (ctx.U != 0.0)
    for (int p = 0; p < pair_count(r); ++p) {
      simd::axpy(cplx{t, 0.0}, line.w1[p], s.wg[p]);
      simd::axpy(cplx{t * t, 0.0}, line.w2[p], s.wg[p]);
    }
  double tp = 1.0;
  for (int i = 1; i < 5; ++i) {
    tp *= t;
    for (std::size_t j = 0; j < s.w.size(); ++j) s.w[j] += tp * line.wrho[i][j];
  }
  detail::refresh_scalars(s, ctx);
}

// Exact minimization over the coefficients for fixed factors.
class CoefficientProblem {
 public:
  CoefficientProblem(const detail::State& s, const detail::Context& ctx)
      : r_(s.rank()), alpha_(ctx.alpha) {
    const std::size_t n = ctx.grid.size();
    const double dv = ctx.grid.cell_volume();
    A_.setZero(r_, r_);
    S_.setZero(r_, r_);
    for (int k = 0; k < r_; ++k)
      for (int l = k; l < r_; ++l) {
        const cplx g = s.Gkl(k, l);
        double a = 2.0 * (s.H(k, l) * g).real();
        if (ctx.U != 0.0) {
          cplx acc{0.0, 0.0};
          const CVec& w = s.wg[pair_index(r_, k, l)];
          for (std::size_t i = 0; i < n; ++i)
            acc += std::conj(s.f[k][i]) * s.f[l][i] * w[i];
          a += ctx.U * (acc * dv).real();
        }
        A_(k, l) = A_(l, k) = a;
        S_(k, l) = S_(l, k) = (g * g).real();
      }
    // rho_c = sum_p c_k c_l Pi_p over pairs k <= l.
    const int np = pair_count(r_);
    pi_.assign(np, RVec(n));
    wpi_.assign(np, RVec(n));
    for (int k = 0; k < r_; ++k)
      for (int l = k; l < r_; ++l) {
        const int p = pair_index(r_, k, l);
        const cplx coef = 2.0 * pair_weight(k, l) * s.Gkl(k, l);
        for (std::size_t i = 0; i < n; ++i)
          pi_[p][i] = (coef * std::conj(s.f[k][i]) * s.f[l][i]).real();
        ctx.coulomb.potential(pi_[p], wpi_[p]);
      }
    T_.setZero(np, np);
    for (int p = 0; p < np; ++p)
      for (int q = p; q < np; ++q)
        T_(p, q) = T_(q, p) = simd::real_dot(pi_[p], wpi_[q]) * dv;
  }

  Eigen::VectorXd pair_products(const Eigen::VectorXd& c) const {
    Eigen::VectorXd cp(pair_count(r_));
    for (int k = 0; k < r_; ++k)
      for (int l = k; l < r_; ++l) cp(pair_index(r_, k, l)) = c(k) * c(l);
    return cp;
  }

  double energy(const Eigen::VectorXd& c) const {
    const double n = c.dot(S_ * c);
    if (!(n > 0.0)) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd cp = pair_products(c);
    return c.dot(A_ * c) / n - alpha_ * cp.dot(T_ * cp) / (n * n);
  }

  // Lowest eigenvector of (A - alpha B(c)) v = lambda S v with S-norm 1.
  Eigen::VectorXd scf_target(const Eigen::VectorXd& c) const {
    const Eigen::VectorXd tc = T_ * pair_products(c);
    Eigen::MatrixXd B(r_, r_);
    for (int k = 0; k < r_; ++k)
      for (int l = k; l < r_; ++l)
        B(k, l) = B(l, k) = 2.0 * tc(pair_index(r_, k, l)) / pair_weight(k, l);
    const Eigen::MatrixXd M = A_ - alpha_ * B;
    // Canonical orthogonalization drops near-dependent directions of S.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S_);
    const double top = es.eigenvalues().maxCoeff();
    std::vector<int> keep;
    for (int i = 0; i < r_; ++i)
      if (es.eigenvalues()(i) > 1e-10 * top) keep.push_back(i);
    Eigen::MatrixXd X(r_, static_cast<int>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
      X.col(static_cast<int>(j)) =
          es.eigenvectors().col(keep[j]) / std::sqrt(es.eigenvalues()(keep[j]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> red(X.transpose() * M * X);
    Eigen::VectorXd v = X * red.eigenvectors().col(0);
    if (v.dot(S_ * c) < 0.0) v = -v;
    return v / std::sqrt(v.dot(S_ * v));
  }

  // Damped SCF from c; returns the improved coefficients (S-normalized).
  Eigen::VectorXd minimize(Eigen::VectorXd c, double scale) const {
    c /= std::sqrt(c.dot(S_ * c));
    double e = energy(c);
    for (int it = 0; it < 50; ++it) {
      const Eigen::VectorXd v = scf_target(c);
      const Eigen::VectorXd dir = v - c;
      auto f = [&](double tau) { return energy(c + tau * dir); };
      const auto [tau, et] = boost::math::tools::brent_find_minima(f, 0.0, 1.0, 50);
      if (!(et < e - 1e-15 * scale)) break;
      c += tau * dir;
      c /= std::sqrt(c.dot(S_ * c));
      e = energy(c);
    }
    return c;
  }

  // w for the given coefficients.
  void density_potential(const Eigen::VectorXd& c, RVec& w) const {
    const Eigen::VectorXd cp = pair_products(c);
    std::fill(w.begin(), w.end(), 0.0);
    for (int p = 0; p < pair_count(r_); ++p)
      for (std::size_t i = 0; i < w.size(); ++i) w[i] += cp(p) * wpi_[p][i];
  }

 private:
  int r_;
  double alpha_;
  Eigen::MatrixXd A_, S_, T_;
  std::vector<RVec> pi_, wpi_;
};

// Pekar seed with the rank-1 coupling (4 alpha - U) / 2, then polynomial
// multiples of it orthogonalized against the earlier factors.
SeparableAnsatz seed(const BipolaronProblem& problem, int rank,
                     const PtOptions& opts) {
  const Grid3D& grid = problem.grid;
  SeparableAnsatz a;
  if (opts.start) {
    if (opts.start->rank() > rank)
      throw ValidationError("start ansatz has a higher rank than requested");
    a.coefficients = opts.start->coefficients;
    for (const auto& f : opts.start->factors) a.factors.push_back(resample(f, grid));
  } else {
    const double kappa = 0.5 * (4.0 * problem.alpha - problem.U);
    pekar::MinimizeOptions po = opts.pekar;
    ComplexField3D f1(grid);
    if (kappa > 0.0) {
      f1 = pekar::minimize_pekar({problem.pair, kappa, grid, nullptr}, po).phi;
    } else {
      const auto opt = pekar::gaussian_family_minimum(problem.pair, problem.alpha, &grid);
      f1 = pekar::gaussian_state(grid, opt.width_parameter, opt.center);
    }
    a.coefficients = {1.0};
    a.factors = {f1};
  }
  const ComplexField3D base = a.factors.front();
  // Center of |f_1|^2 anchors the polynomial multipliers.
  Vec3 center{};
  {
    double mass = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double p = std::norm(base.values[i]);
      const Vec3 x = grid.node(i);
      for (int j = 0; j < 3; ++j) center[j] += p * x[j];
      mass += p;
    }
    for (auto& v : center) v /= mass;
  }
  static constexpr int kAxisOrder[] = {2, 0, 1};
  for (int k = a.rank(); k < rank; ++k) {
    ComplexField3D f = base;
    const int slot = k - 1;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Vec3 x = grid.node(i);
      double mult;
      if (slot < 3) {
        mult = x[kAxisOrder[slot]] - center[kAxisOrder[slot]];
      } else {
        double r2 = 0.0;
        for (int j = 0; j < 3; ++j) r2 += (x[j] - center[j]) * (x[j] - center[j]);
        mult = std::pow(r2, 1 + (slot - 3) / 2.0);
      }
      f.values[i] *= mult;
    }
    for (const auto& prev : a.factors) {
      const cplx proj = inner(prev, f) / prev.norm_sq();
      simd::axpy(-proj, prev.values, f.values);
    }
    f.normalize();
    a.factors.push_back(std::move(f));
    a.coefficients.push_back(-0.1);
  }
  a.normalize();
  return a;
}

}  // namespace

PtSolution minimize_pt(const BipolaronProblem& problem, int rank,
                       const PtOptions& opts) {
  if (rank < 1) throw ValidationError("rank must be >= 1");
  if (rank > opts.max_rank)
    throw ValidationError("rank " + std::to_string(rank) +
                          " exceeds the configured maximum " +
                          std::to_string(opts.max_rank));
  if (!(opts.tolerance > 0.0)) throw ValidationError("solver tolerance must be positive");
  if (opts.max_iterations < 0 || opts.sweep_length < 1)
    throw ValidationError("iteration counts must be positive");

  const PtEvaluator eval(problem, opts.max_rank);
  const Grid3D& grid = problem.grid;
  const std::size_t n = grid.size();
  const double dv = grid.cell_volume();
  const double alpha = problem.alpha;
  const KineticOperator& kin = eval.kinetic();
  const RVec vext = sample(problem.pair.scalar_potential, grid);
  const auto coulomb = CoulombOperator::shared(grid);
  const detail::Context ctx{grid, kin, vext, *coulomb, problem.U, alpha};
  const double box_scale = std::pow(2.0 * kPi / grid.extent(), 2);

  detail::State s;
  {
    SeparableAnsatz start = seed(problem, rank, opts);
    s.c = start.coefficients;
    for (auto& f : start.factors) s.f.push_back(std::move(f.values));
  }

  PtSolution sol;
  auto energy_scale = [&] {
    return std::abs(detail::total(s, alpha)) + std::max(s.kinetic, 0.0) / s.norm +
           box_scale;
  };
  // Rebuild from scratch, normalize and re-optimize the coefficients.
  auto sweep_boundary = [&] {
    detail::rebuild(s, ctx);
    detail::normalize(s);
    if (rank > 1) {
      const CoefficientProblem cp(s, ctx);
      Eigen::VectorXd c0 = Eigen::Map<const Eigen::VectorXd>(s.c.data(), rank);
      const double e0 = cp.energy(c0);
      const Eigen::VectorXd c1 = cp.minimize(c0, energy_scale());
      if (cp.energy(c1) < e0) {
        std::copy(c1.data(), c1.data() + rank, s.c.begin());
        cp.density_potential(c1, s.w);
        detail::refresh_scalars(s, ctx);
      }
    }
    sol.sweep_energies.push_back(detail::total(s, alpha));
    ++sol.sweeps;
  };

  sweep_boundary();
  std::vector<CVec> g, z, z_prev, d(rank, CVec(n));
  std::vector<double> weight(rank);
  auto set_weights = [&] {
    double top = 0.0;
    for (double c : s.c) top = std::max(top, c * c);
    for (int k = 0; k < rank; ++k) weight[k] = 1.0 / std::max(s.c[k] * s.c[k], 1e-6 * top);
  };
  set_weights();
  double rz_prev = 0.0, step_guess = 1.0, rel_res = 0.0;
  bool have_direction = false;
  int since_sweep = 0;
  std::deque<double> window{detail::total(s, alpha)};
  Line line;
  int it = 0;

  for (;; ++it) {
    detail::gradient(s, ctx, g);
    const double scale = energy_scale();
    double fnorm = 0.0;
    for (const auto& f : s.f) fnorm += simd::norm_sq(f);
    rel_res = std::sqrt(re_inner(g, g, dv) / (fnorm * dv)) / scale;

    const double energy = detail::total(s, alpha);
    const bool window_ok =
        static_cast<int>(window.size()) > kEnergyWindow &&
        std::abs(window.front() - energy) <=
            std::max(opts.tolerance * opts.tolerance, 1e-15) * scale;
    if (rel_res < opts.tolerance && window_ok) {
      if (since_sweep == 0) {
        sol.converged = true;
        break;
      }
      sweep_boundary();
      set_weights();
      since_sweep = 0;
      have_direction = false;
      --it;
      continue;
    }
    if (it >= opts.max_iterations) break;

    z = g;
    for (int k = 0; k < rank; ++k) {
      kin.precondition(z[k], scale);
      for (auto& v : z[k]) v *= weight[k];
    }
    const double rz = re_inner(g, z, dv);
    double beta = 0.0;
    if (have_direction && rz_prev > 0.0)
      beta = std::max(0.0, (rz - re_inner(g, z_prev, dv)) / rz_prev);
    for (int k = 0; k < rank; ++k)
      for (std::size_t i = 0; i < n; ++i)
        d[k][i] = -z[k][i] + beta * d[k][i];
    double slope = re_inner(g, d, dv);
    if (!(slope < 0.0)) {
      for (int k = 0; k < rank; ++k)
        for (std::size_t i = 0; i < n; ++i) d[k][i] = -z[k][i];
      slope = re_inner(g, d, dv);
    }
    z_prev = z;
    rz_prev = rz;
    have_direction = true;
    if (!(slope < 0.0)) {
      sol.converged = rel_res < opts.tolerance;
      break;
    }

    build_line(s, ctx, d, line);
    auto energy_at = [&](double t) { return line.energy(t, alpha); };
    const double e0 = energy_at(0.0);
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
      // No decrease along the preconditioned gradient: rounding floor.
      sol.converged = rel_res < opts.tolerance;
      break;
    }
    const auto [tb, eb] = boost::math::tools::brent_find_minima(energy_at, lo, hi, 40);
    if (eb < et) t = tb;
    step_guess = t;
    apply_step(s, ctx, d, line, t);

    window.push_back(detail::total(s, alpha));
    while (static_cast<int>(window.size()) > kEnergyWindow + 1) window.pop_front();
    if (++since_sweep >= opts.sweep_length) {
      sweep_boundary();
      set_weights();
      since_sweep = 0;
      have_direction = false;
    }
  }
  if (since_sweep != 0) sweep_boundary();

  sol.iterations = it;
  sol.residual = rel_res;
  sol.energy = detail::total(s, alpha);
  sol.breakdown.one_body = s.one_body / s.norm;
  sol.breakdown.kinetic = s.kinetic / s.norm;
  sol.breakdown.repulsion = s.repulsion / s.norm;
  sol.breakdown.attraction = s.attraction / (s.norm * s.norm);
  sol.breakdown.total = sol.energy;
  sol.ansatz.coefficients = s.c;
  for (auto& f : s.f) sol.ansatz.factors.emplace_back(grid, std::move(f));
  return sol;
}

PtScalingReport pt_scaling_check(const BipolaronProblem& problem, double s,
                                 int rank, const PtOptions& opts) {
  if (!(s > 0.0)) throw ValidationError("scaling factor must be positive");
  PtScalingReport rep;
  const PtSolution base = minimize_pt(problem, rank, opts);
  rep.rhs = s * s * base.energy;
  if (s == 1.0) {
    rep.lhs = base.energy;
    return rep;
  }
  const BipolaronProblem scaled{
      scale_potentials(problem.pair, s), s * problem.U, s * problem.alpha,
      Grid3D(problem.grid.points(), problem.grid.extent() / s,
             problem.grid.boundary())};
  PtOptions o = opts;
  if (o.start)
    for (auto& f : o.start->factors) f = ComplexField3D(scaled.grid, f.values);
  if (o.pekar.start) o.pekar.start = ComplexField3D(scaled.grid, o.pekar.start->values);
  const PtSolution sc = minimize_pt(scaled, rank, o);
  rep.lhs = sc.energy;
  rep.deviation = std::abs(rep.lhs - rep.rhs) / std::abs(rep.rhs);
  return rep;
}

}  // namespace polaron::bipolaron
