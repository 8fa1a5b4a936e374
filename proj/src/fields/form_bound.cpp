#include "polaron/form_bound.hpp"

#include <algorithm>
#include <cmath>

#include "polaron/kinetic.hpp"

namespace polaron {

double sharp_sobolev_constant() { return 3.0 * std::pow(kPi / 2.0, 4.0 / 3.0); }

FormBoundSplit coulomb_split(double charge, double radius) {
  if (!(radius > 0.0)) throw ValidationError("split radius must be positive");
  const double z = std::abs(charge);
  return {z * std::pow(3.0 * kPi, 0.6) * std::pow(radius, 0.8), z / radius};
}

FormBoundReport form_bound_check(const ComplexField3D& phi,
                                 const ScalarPotentialSpec& v,
                                 const FormBoundSplit& split) {
  FormBoundReport r;
  r.constant = std::max(0.1, 0.9 / sharp_sobolev_constant());
  const double norm_sq = phi.norm_sq();
  const double grad_sq = kinetic_energy(phi, ZeroVectorPotential{});
  r.h1_norm_sq = norm_sq + grad_sq;
  double l5 = 0.0;
  for (const cplx& z : phi.values) l5 += std::pow(std::norm(z), 2.5);
  r.l5_norm_sq = std::pow(l5 * phi.grid.cell_volume(), 0.4);
  r.lhs = std::abs(potential_energy(phi, v));
  r.rhs = r.constant * split.v1_norm_five_thirds * r.h1_norm_sq +
          split.v2_sup * norm_sq;
  r.margin = r.rhs - r.lhs;
  return r;
}

}  // namespace polaron
