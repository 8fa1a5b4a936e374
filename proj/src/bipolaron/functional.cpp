#include <cmath>

#include "bipolaron/state.hpp"
#include "polaron/simd/kernels.hpp"

namespace polaron::bipolaron {

namespace detail {

cplx bilinear(const CVec& a, const CVec& b, double dv) {
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc * dv;
}

void assemble_density(const State& s, const std::vector<double>& c, RVec& rho) {
  const int r = s.rank();
  rho.assign(s.f.front().size(), 0.0);
  for (int k = 0; k < r; ++k)
    for (int l = k; l < r; ++l) {
      const cplx coef = 2.0 * pair_weight(k, l) * c[k] * c[l] * s.Gkl(k, l);
      const CVec& fk = s.f[k];
      const CVec& fl = s.f[l];
      for (std::size_t i = 0; i < rho.size(); ++i)
        rho[i] += (coef * std::conj(fk[i]) * fl[i]).real();
    }
}

void refresh_scalars(State& s, const Context& ctx) {
  const int r = s.rank();
  const double dv = ctx.grid.cell_volume();
  const std::size_t rr = static_cast<std::size_t>(r) * r;
  s.G.assign(rr, {});
  s.T.assign(rr, {});
  s.Vm.assign(rr, {});
  for (int k = 0; k < r; ++k)
    for (int l = k; l < r; ++l) {
      const CVec& fk = s.f[k];
      const CVec& fl = s.f[l];
      const cplx g = simd::dot(fk, fl) * dv;
      const cplx t = simd::dot(fk, s.kf[l]) * dv;
      cplx v{0.0, 0.0};
      for (std::size_t i = 0; i < fk.size(); ++i)
        v += std::conj(fk[i]) * ctx.potential[i] * fl[i];
      v *= dv;
      const std::size_t kl = static_cast<std::size_t>(k) * r + l;
      const std::size_t lk = static_cast<std::size_t>(l) * r + k;
      s.G[kl] = g;
      s.G[lk] = std::conj(g);
      s.T[kl] = t;
      s.T[lk] = std::conj(t);
      s.Vm[kl] = v;
      s.Vm[lk] = std::conj(v);
    }
  assemble_density(s, s.c, s.rho);

  s.norm = s.kinetic = s.one_body = s.repulsion = 0.0;
  for (int k = 0; k < r; ++k)
    for (int l = k; l < r; ++l) {
      const double cc = pair_weight(k, l) * s.c[k] * s.c[l];
      const cplx g = s.Gkl(k, l);
      const std::size_t kl = static_cast<std::size_t>(k) * r + l;
      s.norm += cc * (g * g).real();
      s.kinetic += 2.0 * cc * (s.T[kl] * g).real();
      s.one_body += 2.0 * cc * (s.H(k, l) * g).real();
      if (ctx.U != 0.0) {
        const CVec& fk = s.f[k];
        const CVec& fl = s.f[l];
        const CVec& wkl = s.wg[pair_index(r, k, l)];
        cplx acc{0.0, 0.0};
        for (std::size_t i = 0; i < fk.size(); ++i)
          acc += std::conj(fk[i]) * fl[i] * wkl[i];
        s.repulsion += ctx.U * cc * (acc * dv).real();
      }
    }
  s.attraction = simd::real_dot(s.rho, s.w) * dv;
}

void rebuild(State& s, const Context& ctx) {
  const int r = s.rank();
  const std::size_t n = ctx.grid.size();
  s.kf.assign(r, CVec(n));
  for (int k = 0; k < r; ++k) ctx.kinetic.apply(s.f[k], s.kf[k]);
  s.wg.clear();
  if (ctx.U != 0.0) {
    s.wg.assign(pair_count(r), CVec(n));
    CVec g(n);
    for (int k = 0; k < r; ++k)
      for (int l = k; l < r; ++l) {
        for (std::size_t i = 0; i < n; ++i) g[i] = std::conj(s.f[k][i]) * s.f[l][i];
        ctx.coulomb.potential(g, s.wg[pair_index(r, k, l)]);
      }
  }
  // G enters rho, so the overlaps come first.
  s.w.assign(n, 0.0);
  refresh_scalars(s, ctx);
  ctx.coulomb.potential(s.rho, s.w);
  s.attraction = simd::real_dot(s.rho, s.w) * ctx.grid.cell_volume();
}

void gradient(const State& s, const Context& ctx, std::vector<CVec>& g) {
  const int r = s.rank();
  const std::size_t n = ctx.grid.size();
  const double dv = ctx.grid.cell_volume();
  const double N = s.norm, Q = s.one_body + s.repulsion, D = s.attraction;
  const double a1 = 1.0 / N;
  const double aN = -Q / (N * N) + 2.0 * ctx.alpha * D / (N * N * N);
  const double aD = -ctx.alpha / (N * N);
  g.assign(r, CVec(n, cplx{0.0, 0.0}));
  for (int m = 0; m < r; ++m) {
    CVec& gm = g[m];
    for (int l = 0; l < r; ++l) {
      const double cc = 4.0 * s.c[m] * s.c[l];  // 2 (derivative) x 2 (real grad)
      const cplx G = s.Gkl(m, l);
      cplx omega{0.0, 0.0};
      const CVec& fm = s.f[m];
      const CVec& fl = s.f[l];
      for (std::size_t i = 0; i < n; ++i) omega += std::conj(fm[i]) * s.w[i] * fl[i];
      omega *= dv;
      const cplx scalar = cc * (a1 * s.H(m, l) + aN * G + 2.0 * aD * omega);
      const cplx on_kf = cc * a1 * G;
      const cplx on_w = cc * 2.0 * aD * G;
      const cplx on_v = cc * a1 * G;
      const CVec* wml = nullptr;
      bool conj_w = false;
      if (ctx.U != 0.0) {
        wml = &s.wg[pair_index(r, std::min(m, l), std::max(m, l))];
        conj_w = m > l;
      }
      const double on_wg = cc * a1 * ctx.U;
      const CVec& kfl = s.kf[l];
      for (std::size_t i = 0; i < n; ++i) {
        cplx mult = scalar + on_w * s.w[i] + on_v * ctx.potential[i];
        if (wml) mult += on_wg * (conj_w ? std::conj((*wml)[i]) : (*wml)[i]);
        gm[i] += mult * fl[i] + on_kf * kfl[i];
      }
    }
  }
}

void normalize(State& s) {
  const int r = s.rank();
  std::vector<double> scale(r);
  for (int k = 0; k < r; ++k) {
    const double nk = std::sqrt(s.Gkl(k, k).real());
    scale[k] = nk;
    for (auto& v : s.f[k]) v /= nk;
    for (auto& v : s.kf[k]) v /= nk;
    s.c[k] *= nk * nk;
  }
  for (int k = 0; k < r; ++k)
    for (int l = k; l < r; ++l) {
      const std::size_t kl = static_cast<std::size_t>(k) * r + l;
      const std::size_t lk = static_cast<std::size_t>(l) * r + k;
      const double d = scale[k] * scale[l];
      for (auto* m : {&s.G, &s.T, &s.Vm}) {
        (*m)[kl] /= d;
        if (kl != lk) (*m)[lk] /= d;
      }
      if (!s.wg.empty())
        for (auto& v : s.wg[pair_index(r, k, l)]) v /= d;
    }
  const double inv = 1.0 / std::sqrt(s.norm);
  for (auto& c : s.c) c *= inv;
  const double sq = inv * inv;
  for (auto& v : s.rho) v *= sq;
  for (auto& v : s.w) v *= sq;
  s.one_body *= sq;
  s.kinetic *= sq;
  s.repulsion *= sq;
  s.attraction *= sq * sq;
  s.norm = 1.0;
}

}  // namespace detail

double SeparableAnsatz::norm_sq() const {
  double acc = 0.0;
  for (std::size_t k = 0; k < factors.size(); ++k)
    for (std::size_t l = 0; l < factors.size(); ++l) {
      const cplx g = inner(factors[k], factors[l]);
      acc += coefficients[k] * coefficients[l] * (g * g).real();
    }
  return acc;
}

void SeparableAnsatz::normalize() {
  if (factors.empty() || coefficients.size() != factors.size())
    throw ValidationError("ansatz needs one coefficient per factor");
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const double nk = factors[k].norm_sq();
    if (!(nk > 0.0)) throw ValidationError("ansatz factor is zero");
    for (auto& v : factors[k].values) v /= std::sqrt(nk);
    coefficients[k] *= nk;
  }
  const double n = norm_sq();
  if (!(n > 0.0)) throw ValidationError("ansatz is zero");
  for (auto& c : coefficients) c /= std::sqrt(n);
}

SeparableAnsatz product_ansatz(const ComplexField3D& f) {
  SeparableAnsatz a;
  a.coefficients = {1.0};
  a.factors = {f};
  a.normalize();
  return a;
}

PtEvaluator::PtEvaluator(const BipolaronProblem& problem, int max_rank)
    : problem_(problem),
      max_rank_(max_rank),
      kinetic_(problem.grid, problem.pair.vector_potential),
      potential_(sample(problem.pair.scalar_potential, problem.grid)),
      coulomb_(CoulombOperator::shared(problem.grid)) {
  if (!(problem.U >= 0.0) || !std::isfinite(problem.U))
    throw ValidationError("repulsion U must be non-negative and finite");
  if (!(problem.alpha > 0.0) || !std::isfinite(problem.alpha))
    throw ValidationError("coupling alpha must be positive and finite");
  if (max_rank < 1) throw ValidationError("maximum rank must be >= 1");
}

void PtEvaluator::check(const SeparableAnsatz& a) const {
  if (a.rank() < 1) throw ValidationError("ansatz rank must be >= 1");
  if (a.rank() > max_rank_)
    throw ValidationError("ansatz rank " + std::to_string(a.rank()) +
                          " exceeds the configured maximum " +
                          std::to_string(max_rank_));
  if (a.coefficients.size() != a.factors.size())
    throw ValidationError("ansatz needs one coefficient per factor");
  for (const auto& f : a.factors)
    if (!f.grid.matches(problem_.grid))
      throw ValidationError("ansatz factor does not match the problem grid");
}

namespace {

detail::State state_from(const SeparableAnsatz& a) {
  detail::State s;
  s.c = a.coefficients;
  for (const auto& f : a.factors) s.f.push_back(f.values);
  return s;
}

PtBreakdown breakdown(const detail::State& s, double alpha) {
  PtBreakdown b;
  b.one_body = s.one_body / s.norm;
  b.kinetic = s.kinetic / s.norm;
  b.repulsion = s.repulsion / s.norm;
  b.attraction = s.attraction / (s.norm * s.norm);
  b.total = detail::total(s, alpha);
  return b;
}

}  // namespace

PtBreakdown PtEvaluator::energy(const SeparableAnsatz& a) const {
  check(a);
  detail::State s = state_from(a);
  const detail::Context ctx{problem_.grid, kinetic_, potential_, *coulomb_,
                            problem_.U, problem_.alpha};
  detail::rebuild(s, ctx);
  if (!(s.norm > 0.0)) throw ValidationError("ansatz is zero");
  return breakdown(s, problem_.alpha);
}

PtBreakdown PtEvaluator::gradient(const SeparableAnsatz& a,
                                  std::vector<ComplexField3D>& grads) const {
  check(a);
  detail::State s = state_from(a);
  const detail::Context ctx{problem_.grid, kinetic_, potential_, *coulomb_,
                            problem_.U, problem_.alpha};
  detail::rebuild(s, ctx);
  if (!(s.norm > 0.0)) throw ValidationError("ansatz is zero");
  std::vector<CVec> g;
  detail::gradient(s, ctx, g);
  grads.clear();
  for (auto& v : g) grads.emplace_back(problem_.grid, std::move(v));
  return breakdown(s, problem_.alpha);
}

PtBreakdown pt_energy(const SeparableAnsatz& a, const BipolaronProblem& problem,
                      int max_rank) {
  return PtEvaluator(problem, max_rank).energy(a);
}

double product_energy(const ComplexField3D& f, const BipolaronProblem& problem) {
  ComplexField3D g = f;
  g.normalize();
  const pekar::EnergyBreakdown e =
      pekar::pekar_breakdown(g, {problem.pair, 1.0, problem.grid, nullptr});
  return 2.0 * (e.kinetic + e.potential) +
         (problem.U - 4.0 * problem.alpha) * e.coulomb;
}

}  // namespace polaron::bipolaron
