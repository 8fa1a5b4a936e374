#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <variant>

#include "polaron/pekar.hpp"

namespace polaron::pekar {
namespace {

Vec3 potential_center(const ScalarPotentialSpec& v, const Grid3D* grid) {
  if (const auto* c = std::get_if<CoulombPotential>(&v)) return c->center;
  if (const auto* g = std::get_if<GaussianWell>(&v))
    return g->depth < 0.0 ? g->center : Vec3{};
  if (const auto* s = std::get_if<SampledScalarPotential>(&v)) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < s->values.size(); ++i)
      if (s->values[i] < s->values[best]) best = i;
    (void)grid;
    return s->grid.node(best);
  }
  return {};
}

bool sampled(const PotentialPair& pair) {
  return std::holds_alternative<SampledVectorPotential>(pair.vector_potential) ||
         std::holds_alternative<SampledScalarPotential>(pair.scalar_potential);
}

double grid_energy(double a, const Vec3& center, const PotentialPair& pair,
                   double alpha, const Grid3D& grid) {
  PekarProblem p{pair, alpha, grid, nullptr};
  return pekar_energy(gaussian_state(grid, a, center), p);
}

}  // namespace

ComplexField3D gaussian_state(const Grid3D& grid, double a,
                              const Vec3& center) {
  if (!(a > 0.0)) throw ValidationError("gaussian width parameter must be > 0");
  ComplexField3D f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 x = grid.node(i);
    const Vec3 d{x[0] - center[0], x[1] - center[1], x[2] - center[2]};
    f.values[i] = std::exp(-a * dot3(d, d));
  }
  f.normalize();
  return f;
}

double gaussian_family_energy(double a, const Vec3& center,
                              const PotentialPair& pair, double alpha) {
  if (sampled(pair))
    throw ValidationError(
        "closed-form Gaussian energy needs analytic fields; pass a grid");
  // |psi|^2 is normal with variance s2 per axis.
  const double s2 = 1.0 / (4.0 * a);
  double e = 3.0 * a;
  if (const auto* b = std::get_if<ConstantMagneticField>(&pair.vector_potential)) {
    const Vec3 bc = cross(b->field, center);
    e += 0.25 * (dot3(bc, bc) + dot3(b->field, b->field) * 2.0 * s2);
  }
  if (const auto* c = std::get_if<CoulombPotential>(&pair.scalar_potential)) {
    const Vec3 d{center[0] - c->center[0], center[1] - c->center[1],
                 center[2] - c->center[2]};
    const double r = std::sqrt(dot3(d, d));
    const double mean_inv =
        r == 0.0 ? 2.0 * std::sqrt(2.0 * a / kPi) : std::erf(std::sqrt(2.0 * a) * r) / r;
    e -= c->charge * mean_inv;
  } else if (const auto* g = std::get_if<GaussianWell>(&pair.scalar_potential)) {
    const Vec3 d{center[0] - g->center[0], center[1] - g->center[1],
                 center[2] - g->center[2]};
    const double w2 = g->width * g->width;
    e += g->depth * std::pow(w2 / (w2 + s2), 1.5) *
         std::exp(-dot3(d, d) / (2.0 * (w2 + s2)));
  }
  e -= alpha * 2.0 * std::sqrt(a / kPi);
  return e;
}

GaussianFamilyOptimum gaussian_family_minimum(const PotentialPair& pair,
                                              double alpha,
                                              const Grid3D* grid) {
  GaussianFamilyOptimum out;
  out.center = potential_center(pair.scalar_potential, grid);
  double lo = std::log(1e-8), hi = std::log(1e8);
  const bool use_grid = sampled(pair);
  if (use_grid && grid == nullptr)
    throw ValidationError("sampled fields need a grid for the Gaussian family");
  if (grid != nullptr) {
    // Keep the Gaussian resolvable: h <= rms per axis <= extent / 8.
    const double h = grid->spacing();
    lo = std::log(16.0 / (grid->extent() * grid->extent()));
    hi = std::log(1.0 / (4.0 * h * h));
  }
  auto f = [&](double log_a) {
    const double a = std::exp(log_a);
    return use_grid ? grid_energy(a, out.center, pair, alpha, *grid)
                    : gaussian_family_energy(a, out.center, pair, alpha);
  };
  const auto [x, fx] = boost::math::tools::brent_find_minima(
      f, lo, hi, use_grid ? 30 : std::numeric_limits<double>::digits);
  out.width_parameter = std::exp(x);
  out.energy = fx;
  return out;
}

double default_extent(const PotentialPair& pair, double alpha) {
  PotentialPair analytic = pair;
  if (std::holds_alternative<SampledVectorPotential>(pair.vector_potential))
    analytic.vector_potential = ZeroVectorPotential{};
  if (std::holds_alternative<SampledScalarPotential>(pair.scalar_potential))
    analytic.scalar_potential = ZeroScalarPotential{};
  if (alpha == 0.0 && is_zero(analytic.scalar_potential) &&
      is_zero(analytic.vector_potential))
    throw ValidationError("free problem without coupling has no length scale");
  const auto opt = gaussian_family_minimum(analytic, alpha);
  // rms radius of |psi|^2 is sqrt(3 / (4 a)).
  return 12.0 * std::sqrt(3.0 / (4.0 * opt.width_parameter));
}

}  // namespace polaron::pekar
