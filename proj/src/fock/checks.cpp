#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "polaron/fock.hpp"
#include "polaron/simd/kernels.hpp"

namespace polaron::fock {
namespace {

// Lowest eigenvalue of nu b*b + |c| (b + b*) on {0..cutoff}, and its vector.
std::pair<double, Eigen::VectorXd> truncated_displaced(double nu, double c,
                                                       int cutoff) {
  Eigen::VectorXd diag(cutoff + 1), sub(cutoff);
  for (int m = 0; m <= cutoff; ++m) diag[m] = nu * m;
  for (int m = 0; m < cutoff; ++m) sub[m] = c * std::sqrt(m + 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  return {es.eigenvalues()[0], es.eigenvectors().col(0)};
}

struct PlaneMatrices {
  Eigen::MatrixXcd identity;  // <m| int |z><z| |m'>
  Eigen::MatrixXcd number;    // <m| int (|z|^2 - 1) |z><z| |m'>
};

PlaneMatrices plane_matrices(int cutoff, const Quadrature& q) {
  const int dim = cutoff + 1;
  const int angles = q.angles > 0 ? q.angles : 2 * cutoff + 2;
  gsl_integration_glfixed_table* tab =
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(q.points));
  if (!tab) throw Error("GSL could not allocate the Gauss-Legendre table");
  PlaneMatrices pm{Eigen::MatrixXcd::Zero(dim, dim), Eigen::MatrixXcd::Zero(dim, dim)};
  std::vector<double> lf(dim);
  for (int m = 0; m < dim; ++m) lf[m] = std::lgamma(m + 1.0);
  std::vector<cplx> ang(angles);
  for (int i = 0; i < q.points; ++i) {
    double r = 0.0, wr = 0.0;
    gsl_integration_glfixed_point(0.0, q.radius, static_cast<std::size_t>(i), &r,
                                  &wr, tab);
    // (1/pi) r dr dtheta with the trapezoid weight 2 pi / angles
    const double base = wr * r * 2.0 / angles;
    for (int t = 0; t < angles; ++t) {
      const double th = 2.0 * kPi * t / angles;
      for (int m = 0; m < dim; ++m)
        for (int mp = 0; mp < dim; ++mp) {
          const double mag = std::exp(-r * r + (m + mp) * std::log(r) -
                                      0.5 * (lf[m] + lf[mp]));
          const cplx e = base * mag * cplx{std::cos((m - mp) * th), std::sin((m - mp) * th)};
          pm.identity(m, mp) += e;
          pm.number(m, mp) += (r * r - 1.0) * e;
        }
    }
  }
  gsl_integration_glfixed_table_free(tab);
  return pm;
}

}  // namespace

CoherentIdentityReport coherent_minimization_identity(
    const RealField3D& rho, const ModeSet& modes, double alpha, double delta,
    int cutoff, const GroundStateOptions& opts) {
  if (modes.modes.empty()) throw ValidationError("mode set is empty");
  if (!(delta >= 0.0 && delta < 1.0)) throw ValidationError("delta must lie in [0, 1)");
  if (!(alpha >= 0.0)) throw ValidationError("alpha must be non-negative");
  for (double r : rho.values)
    if (!(r >= 0.0)) throw ValidationError("density must be non-negative");
  const double mass = rho.integral();
  if (std::abs(mass - 1.0) > 1e-8 && std::abs(mass - 2.0) > 1e-8)
    throw ValidationError("density must have mass 1 or 2");

  const double nu = 1.0 - delta;
  CoherentIdentityReport rep;
  std::vector<cplx> couplings;
  for (const Mode& m : modes.modes) {
    const cplx hat = density_transform(rho, m.representative);
    rep.amplitudes.push_back(hat);
    const cplx c = coupling_constant(alpha, m.weight) * hat;
    couplings.push_back(c);
    rep.closed_form -= std::norm(c) / nu;
    rep.max_shift_sq = std::max(rep.max_shift_sq, std::norm(c) / (nu * nu));
  }
  const auto op = TruncatedFockOperator::phonon_sector(nu, couplings, {cutoff});
  GroundStateOptions o = opts;
  o.max_nonzeros = std::max(o.max_nonzeros, op.nonzeros());
  if (!o.start) {
    // The vacuum overlaps every displaced ground state.
    CVec start(op.dimension(), cplx{0.0, 0.0});
    start[0] = 1.0;
    for (std::size_t i = 1; i < start.size(); ++i) start[i] = 1e-3;
    o.start = std::move(start);
  }
  const GroundState gs = ground_state(op, o);
  if (!gs.converged) throw SolverError("phonon-sector Lanczos did not converge");
  rep.lanczos_min = gs.energy;
  rep.deviation = std::abs(rep.lanczos_min - rep.closed_form);
  return rep;
}

ResolutionReport resolution_checks(int mode_count, int cutoff,
                                   const Quadrature& quad) {
  if (mode_count < 1) throw ValidationError("mode_count must be >= 1");
  if (cutoff < 1) throw ValidationError("cutoff must be >= 1");
  if (!(quad.radius > 0.0) || quad.points < 8)
    throw ValidationError("quadrature needs a positive radius and >= 8 points");
  const PlaneMatrices pm = plane_matrices(cutoff, quad);
  const int dim = cutoff + 1;
  const int half = cutoff / 2;
  const int others = mode_count - 1;

  // The multi-plane matrices are Kronecker products of the single-plane ones;
  // their extreme entries follow from the single-plane extremes.
  double d_all = 0.0, off = 0.0, d_lo = 1e300, d_hi = 0.0;
  for (int m = 0; m < dim; ++m)
    for (int mp = 0; mp < dim; ++mp) {
      const double v = std::abs(pm.identity(m, mp));
      if (m == mp) {
        d_all = std::max(d_all, v);
        if (m <= half) {
          d_lo = std::min(d_lo, pm.identity(m, m).real());
          d_hi = std::max(d_hi, pm.identity(m, m).real());
        }
      } else {
        off = std::max(off, v);
      }
    }
  const double any = std::max(d_all, off);
  auto pow_i = [](double x, int k) { return std::pow(x, k); };

  ResolutionReport rep;
  rep.vacuum = std::abs(pow_i(pm.identity(0, 0).real(), mode_count) - 1.0);
  rep.identity_diagonal = std::max(std::abs(pow_i(d_lo, mode_count) - 1.0),
                                   std::abs(pow_i(d_hi, mode_count) - 1.0));
  for (int s = 1; s <= mode_count; ++s)
    rep.identity_off_diagonal =
        std::max(rep.identity_off_diagonal, pow_i(off, s) * pow_i(d_all, mode_count - s));

  const double p_lo = pow_i(d_lo, others), p_hi = pow_i(d_hi, others);
  double n_diag_max = 0.0, n_off = 0.0;
  for (int m = 0; m < dim; ++m)
    for (int mp = 0; mp < dim; ++mp) {
      const double v = std::abs(pm.number(m, mp));
      if (m == mp) {
        n_diag_max = std::max(n_diag_max, v);
        if (m <= half) {
          const double nd = pm.number(m, m).real();
          rep.number_diagonal = std::max(
              {rep.number_diagonal, std::abs(nd * p_lo - m), std::abs(nd * p_hi - m)});
        }
      } else {
        n_off = std::max(n_off, v);
      }
    }
  rep.number_off_diagonal = n_off * pow_i(any, others);
  for (int s = 1; s <= others; ++s)
    rep.number_off_diagonal = std::max(
        rep.number_off_diagonal, n_diag_max * pow_i(off, s) * pow_i(d_all, others - s));
  return rep;
}

CsquaresReport csquares_check(const CsquaresParams& p) {
  if (p.submodes < 2) throw ValidationError("need at least two sub-modes");
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  if (!(p.alpha >= 0.0)) throw ValidationError("alpha must be non-negative");
  if (!(p.P > 0.0) || !(p.L > 0.0)) throw ValidationError("P and L must be positive");
  if (p.states < 1) throw ValidationError("states must be >= 1");

  const Vec3 center{p.cell[0] * p.P, p.cell[1] * p.P, p.cell[2] * p.P};
  const double slab = p.P / p.submodes;
  std::vector<Vec3> ks;
  std::vector<double> w;
  for (int j = 0; j < p.submodes; ++j) {
    Vec3 k = center;
    k[0] += -0.5 * p.P + (j + 0.5) * slab;
    const double k2 = dot3(k, k);
    if (!(k2 > 0.0)) throw ValidationError("a sub-mode sits at k = 0");
    ks.push_back(k);
    w.push_back(slab * p.P * p.P / k2);
  }
  double wsum = 0.0;
  for (double x : w) wsum += x;
  const double bound = 1.5 * p.P * p.L;
  CsquaresReport rep;
  rep.penalty = p.alpha / (2.0 * kPi * kPi * p.delta) * bound * bound * wsum;

  std::mt19937_64 gen(p.seed);
  std::uniform_real_distribution<double> ux(-0.5 * p.L, 0.5 * p.L), uz(-1.0, 1.0);
  auto form_at = [&](const Vec3& x) {
    std::vector<cplx> c;
    const double a0 = dot3(center, x);
    for (int j = 0; j < p.submodes; ++j) {
      const double a = dot3(ks[j], x);
      const cplx diff = cplx{std::cos(a), std::sin(a)} - cplx{std::cos(a0), std::sin(a0)};
      c.push_back(std::sqrt(p.alpha * w[j]) / (std::sqrt(2.0) * kPi) * diff);
    }
    return TruncatedFockOperator::phonon_sector(p.delta, c, {p.cutoff});
  };

  rep.min_expectation = 1e300;
  rep.ground_minimum = 1e300;
  for (int s = 0; s < p.states; ++s) {
    const Vec3 x{ux(gen), ux(gen), ux(gen)};
    const auto op = form_at(x);
    CVec psi(op.dimension());
    for (auto& z : psi) z = {uz(gen), uz(gen)};
    const double e = op.expectation(psi) + rep.penalty;
    // The modes decouple at fixed x.
    double ground = rep.penalty;
    for (std::size_t j = 0; j < op.mode_count(); ++j)
      ground += truncated_displaced(p.delta, std::abs(op.couplings()[j]), p.cutoff).first;
    rep.ground_minimum = std::min(rep.ground_minimum, ground);
    rep.min_expectation = std::min(rep.min_expectation, e);
    if (s == 0) {
      CVec vac(op.dimension(), cplx{0.0, 0.0});
      vac[0] = 1.0;
      rep.vacuum_expectation = op.expectation(vac) + rep.penalty;
    }
    ++rep.samples;
  }
  return rep;
}

OrderingReport pekar_ordering_check(const Grid3D& grid, const ModeSet& modes,
                                    const BlockParams& params,
                                    const GroundStateOptions& opts,
                                    const pekar::MinimizeOptions& pekar_opts) {
  const TruncatedFockOperator op = build_block_hamiltonian(grid, modes, params);
  const ModeSet& snapped = op.modes();
  OrderingReport rep;
  rep.warnings = op.warnings();
  const double nu = 1.0 - params.delta;
  rep.mu = params.alpha / (params.beta * nu);

  PotentialPair scaled = params.pair;
  scaled.scalar_potential = scaled_by(params.pair.scalar_potential, 1.0 / params.beta);
  const pekar::PekarProblem prob{scaled, rep.mu, grid, mode_sum_interaction(grid, snapped)};
  const pekar::PekarSolution sol = pekar::minimize_pekar(prob, pekar_opts);
  rep.E_pekar_discrete = sol.energy;
  rep.lower = params.beta * sol.energy - static_cast<double>(snapped.size());

  // Product state phi x eta on the same minimizer.
  const double dv = grid.cell_volume();
  const double kinetic = sol.kinetic;
  const RVec v = sample(params.pair.scalar_potential, grid);
  const double potential = simd::weighted_norm_sq(v, sol.phi.values) * dv;
  const RealField3D rho = sol.phi.density();
  rep.E_product = params.beta * kinetic + potential;
  rep.E_coherent = rep.E_product;
  std::vector<std::vector<cplx>> eta;
  for (std::size_t n = 0; n < snapped.size(); ++n) {
    const cplx c = coupling_constant(params.alpha, snapped.modes[n].weight) *
                   density_transform(rho, snapped.modes[n].representative);
    const auto [e, vec] = truncated_displaced(nu, std::abs(c), op.cutoffs()[n]);
    rep.E_product += e;
    rep.E_coherent -= std::norm(c) / nu;
    // c = |c| e^{i theta}: the ground state picks up e^{-i m theta}.
    const double theta = std::arg(c);
    std::vector<cplx> col(vec.size());
    for (int m = 0; m < vec.size(); ++m)
      col[m] = vec[m] * cplx{std::cos(m * theta), -std::sin(m * theta)};
    eta.push_back(std::move(col));
  }

  GroundStateOptions o = opts;
  if (!o.start) {
    // Lanczos starts from the product state with a small deterministic tilt.
    const std::size_t nodes = op.electron_nodes();
    CVec start(op.dimension());
    std::mt19937_64 gen(opts.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double root = std::sqrt(dv);
    for (std::size_t b = 0; b < op.boson_blocks(); ++b) {
      const auto occ = op.occupations(b);
      cplx amp{1.0, 0.0};
      for (std::size_t n = 0; n < occ.size(); ++n) amp *= eta[n][occ[n]];
      for (std::size_t i = 0; i < nodes; ++i)
        start[b * nodes + i] =
            amp * root * sol.phi.values[i] + 1e-3 * cplx{u(gen), u(gen)} / std::sqrt(double(op.dimension()));
    }
    o.start = std::move(start);
  }
  rep.ground = ground_state(op, o);
  rep.E_toy = rep.ground.energy;
  rep.upper_holds = rep.E_toy <= rep.E_product;
  rep.lower_holds = rep.E_toy >= rep.lower;
  return rep;
}

std::vector<ComplexField3D> random_electron_states(const Grid3D& grid,
                                                   int count,
                                                   std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<ComplexField3D> out;
  for (int s = 0; s < count; ++s) {
    ComplexField3D f(grid);
    for (auto& z : f.values) z = {u(gen), u(gen)};
    f.normalize();
    out.push_back(std::move(f));
  }
  return out;
}

LocalizationReport localization_average_check(
    const Grid3D& grid, double L, const PotentialPair& pair, double beta,
    const std::vector<ComplexField3D>& states) {
  if (grid.boundary() != Boundary::kPeriodic)
    throw ValidationError("localization check needs a periodic grid");
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
  const double h = grid.spacing();
  const double cells = L / h;
  if (!(L > 0.0) || std::abs(cells - std::round(cells)) > 1e-9 * std::max(1.0, cells) ||
      L > grid.extent() * (1.0 + 1e-12))
    throw ValidationError("L must be a whole number of grid spacings within the box");
  if (states.empty()) throw ValidationError("need at least one state");

  const int n = grid.points();
  const std::size_t total = grid.size();
  const double dv = grid.cell_volume();
  const budget::LocalizationProfile profile(L);

  // Profile on periodic node offsets (minimum image).
  auto wrap = [n](int d) { return ((d % n) + n) % n; };
  auto signed_offset = [n](int d) { return d <= n / 2 ? d : d - n; };
  RVec prof(total);
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        prof[grid.index(ix, iy, iz)] = profile.value(
            {signed_offset(ix) * h, signed_offset(iy) * h, signed_offset(iz) * h});
  auto offset_index = [&](int dx, int dy, int dz) {
    return grid.index(wrap(dx), wrap(dy), wrap(dz));
  };
  // C(d) = h^3 sum_y phi(y) phi(y + d)
  RVec corr(total, 0.0);
  for (int dz = 0; dz < n; ++dz)
    for (int dy = 0; dy < n; ++dy)
      for (int dx = 0; dx < n; ++dx) {
        double s = 0.0;
        for (int iz = 0; iz < n; ++iz)
          for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
              const double a = prof[grid.index(ix, iy, iz)];
              if (a != 0.0) s += a * prof[offset_index(ix + dx, iy + dy, iz + dz)];
            }
        corr[grid.index(dx, dy, dz)] = s * dv;
      }

  LocalizationReport rep;
  rep.delta_E = 3.0 * beta * (kPi / L) * (kPi / L);
  rep.partition = corr[0];
  rep.continuum_partition = std::pow(0.5 * L, 3);

  const KineticOperator kin(grid, pair.vector_potential);
  const RVec v = sample(pair.scalar_potential, grid);
  auto coords = [&](std::size_t i) {
    const int ix = static_cast<int>(i % n), iy = static_cast<int>((i / n) % n),
              iz = static_cast<int>(i / (static_cast<std::size_t>(n) * n));
    return std::array<int, 3>{ix, iy, iz};
  };

  std::vector<CVec> psis;
  std::vector<double> energies;
  for (const auto& s0 : states) {
    if (!s0.grid.matches(grid)) throw ValidationError("state grid does not match");
    ComplexField3D s = s0;
    s.normalize();
    CVec hs(total);
    kin.apply(s.values, hs);
    double e = 0.0;
    for (std::size_t i = 0; i < total; ++i)
      e += (std::conj(s.values[i]) * (beta * hs[i] + v[i] * s.values[i])).real();
    psis.push_back(s.values);
    energies.push_back(e * dv);
  }

  // IMS side: h^3 sum_ij conj(psi_i) K_ij psi_j (C(0) - C(i - j)), one column of
  // the kinetic matrix at a time.
  std::vector<double> ims(psis.size(), 0.0);
  CVec unit(total, cplx{0.0, 0.0}), col(total);
  for (std::size_t j = 0; j < total; ++j) {
    unit[j] = 1.0;
    kin.apply(unit, col);
    unit[j] = 0.0;
    const auto cj = coords(j);
    for (std::size_t i = 0; i < total; ++i) {
      if (col[i] == cplx{0.0, 0.0}) continue;
      const auto ci = coords(i);
      const double weight =
          corr[0] - corr[offset_index(ci[0] - cj[0], ci[1] - cj[1], ci[2] - cj[2])];
      if (weight == 0.0) continue;
      const cplx kw = col[i] * weight;
      for (std::size_t s = 0; s < psis.size(); ++s)
        ims[s] += (std::conj(psis[s][i]) * kw * psis[s][j]).real();
    }
  }

  // Direct side: every shift y of the profile.
  CVec loc(total), hl(total);
  for (std::size_t s = 0; s < psis.size(); ++s) {
    const double E = energies[s];
    double direct = 0.0;
    for (std::size_t y = 0; y < total; ++y) {
      const auto cy = coords(y);
      for (std::size_t i = 0; i < total; ++i) {
        const auto ci = coords(i);
        loc[i] = prof[offset_index(ci[0] - cy[0], ci[1] - cy[1], ci[2] - cy[2])] * psis[s][i];
      }
      kin.apply(loc, hl);
      double term = 0.0;
      for (std::size_t i = 0; i < total; ++i)
        term += (std::conj(loc[i]) *
                 (beta * hl[i] + (v[i] - E - rep.delta_E) * loc[i])).real();
      direct += term * dv;
    }
    direct *= dv;
    const double predicted = -beta * ims[s] * dv - rep.delta_E * rep.partition;
    const double scale = beta * std::abs(ims[s] * dv) +
                         rep.partition * (std::abs(E) + rep.delta_E);
    rep.max_deviation = std::max(rep.max_deviation, std::abs(direct - predicted) / scale);
    rep.max_continuum_residual =
        std::max(rep.max_continuum_residual,
                 std::abs(direct) / (rep.partition * (std::abs(E) + rep.delta_E)));
    rep.sums.push_back(direct);
  }
  return rep;
}

}  // namespace polaron::fock
