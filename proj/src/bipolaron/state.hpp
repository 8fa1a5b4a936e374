#pragma once
// Separable two-body state phi = sum_k c_k f_k (x) f_k with the one-body and
// Coulomb pieces the functional and its gradient are assembled from.
//
// With G_kl = <f_k, f_l>, H_kl = <f_k, h f_l> and g_kl = conj(f_k) f_l:
//   ||phi||^2   = sum c_k c_l G_kl^2
//   one-body    = 2 sum c_k c_l H_kl G_kl
//   repulsion   = U sum c_k c_l D(g_kl, g_kl)     (bilinear D)
//   rho         = 2 sum c_k c_l G_kl g_kl
// Pair (l, k) is the complex conjugate of pair (k, l), so every sum runs over
// k <= l with weight 2 off the diagonal and keeps the real part.

#include <vector>

#include "polaron/bipolaron.hpp"

namespace polaron::bipolaron::detail {

struct Context {
  const Grid3D& grid;
  const KineticOperator& kinetic;
  const RVec& potential;
  const CoulombOperator& coulomb;
  double U;
  double alpha;
};

inline int pair_count(int r) { return r * (r + 1) / 2; }
// Index of (k, l), k <= l, in row-major upper-triangle order.
inline int pair_index(int r, int k, int l) {
  return k * r - k * (k - 1) / 2 + (l - k);
}
inline double pair_weight(int k, int l) { return k == l ? 1.0 : 2.0; }

struct State {
  std::vector<double> c;
  std::vector<CVec> f, kf;  // factors and D_A^2 f
  std::vector<CVec> wg;     // W[conj(f_k) f_l] per pair
  RVec w;                   // W[rho]

  // Derived by refresh_scalars().
  std::vector<cplx> G, T, Vm;  // r x r: overlap, kinetic, potential
  RVec rho;
  double norm = 0.0, kinetic = 0.0, one_body = 0.0, repulsion = 0.0,
         attraction = 0.0;

  int rank() const { return static_cast<int>(f.size()); }
  cplx H(int k, int l) const {
    const std::size_t i = static_cast<std::size_t>(k) * f.size() + l;
    return T[i] + Vm[i];
  }
  cplx Gkl(int k, int l) const { return G[static_cast<std::size_t>(k) * f.size() + l]; }
};

// Normalized energy.
inline double total(const State& s, double alpha) {
  return (s.one_body + s.repulsion) / s.norm -
         alpha * s.attraction / (s.norm * s.norm);
}

// rho = 2 sum c_k c_l G_kl conj(f_k) f_l for the given coefficients.
void assemble_density(const State& s, const std::vector<double>& c, RVec& rho);

// Recomputes kf, wg and w from f and c, then the scalars.
void rebuild(State& s, const Context& ctx);
// G, T, Vm, rho and the unnormalized terms from f, kf, wg, w.
void refresh_scalars(State& s, const Context& ctx);

// g_m with dE = sum_m Re <g_m, delta f_m> for the normalized energy.
void gradient(const State& s, const Context& ctx, std::vector<CVec>& g);

// Unit-norm factors with the scale moved into c, then ||phi|| = 1. Potentials
// and scalars are rescaled in place.
void normalize(State& s);

// h^3 sum a_i b_i, no conjugation.
cplx bilinear(const CVec& a, const CVec& b, double dv);

}  // namespace polaron::bipolaron::detail
