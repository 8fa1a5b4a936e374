#include <algorithm>
#include <cmath>

#include "polaron/pekar.hpp"

namespace polaron::pekar {
namespace {

ScanPoint to_point(double parameter, const PekarSolution& s) {
  return {parameter, s.energy, s.projected_residual, s.energy_error_estimate,
          s.converged, s.iterations};
}

}  // namespace

ScalingReport scaling_check(const PekarProblem& problem, double s,
                            const MinimizeOptions& opts) {
  if (!(s > 0.0)) throw ValidationError("scaling factor must be positive");
  ScalingReport rep(problem.grid);
  rep.base = minimize_pekar(problem, opts);
  rep.rhs = s * s * rep.base.energy;
  if (s == 1.0) {
    rep.scaled = rep.base;
    rep.lhs = rep.base.energy;
    rep.deviation = 0.0;
    return rep;
  }
  PekarProblem scaled{scale_potentials(problem.pair, s), s * problem.alpha,
                      Grid3D(problem.grid.points(), problem.grid.extent() / s,
                             problem.grid.boundary()),
                      nullptr};
  if (problem.interaction)
    throw ValidationError("scaling check is defined for the Coulomb interaction");
  MinimizeOptions o = opts;
  if (o.start) o.start = ComplexField3D(scaled.grid, o.start->values);
  rep.scaled = minimize_pekar(scaled, o);
  rep.lhs = rep.scaled.energy;
  rep.deviation = std::abs(rep.lhs - rep.rhs) / std::abs(rep.rhs);
  return rep;
}

ConcavityReport concavity_scan(const PotentialPair& pair,
                               const std::vector<double>& lambdas,
                               const Grid3D& grid,
                               const MinimizeOptions& opts) {
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw ValidationError("lambdas must be positive");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
      throw ValidationError("lambdas must be increasing");
  }
  ConcavityReport rep;
  MinimizeOptions o = opts;
  for (double lam : lambdas) {
    PekarProblem p{{pair.vector_potential, scaled_by(pair.scalar_potential, lam)},
                   lam * lam, grid, nullptr};
    const PekarSolution s = minimize_pekar(p, o);
    rep.points.push_back(to_point(lam, s));
    rep.solver_epsilon = std::max(rep.solver_epsilon, s.energy_error_estimate);
    // Neighbouring problems share a shape; warm-start the next one.
    o.initializer = Initializer::kProvided;
    o.start = s.phi;
  }
  for (std::size_t i = 1; i + 1 < rep.points.size(); ++i) {
    const double l0 = lambdas[i - 1], l1 = lambdas[i], l2 = lambdas[i + 1];
    const double f0 = rep.points[i - 1].energy, f1 = rep.points[i].energy,
                 f2 = rep.points[i + 1].energy;
    // Divided difference rescaled so uniform spacing gives f0 - 2 f1 + f2.
    const double dd = f0 / ((l0 - l1) * (l0 - l2)) +
                      f1 / ((l1 - l0) * (l1 - l2)) +
                      f2 / ((l2 - l0) * (l2 - l1));
    const double half = 0.5 * (l2 - l0);
    const double second = 2.0 * dd * half * half;
    rep.second_differences.push_back(second);
    if (second > 2.0 * rep.solver_epsilon) rep.concave = false;
  }
  return rep;
}

DiamagneticReport diamagnetic_check(const ScalarPotentialSpec& v,
                                    const std::vector<double>& fields,
                                    double alpha, const Grid3D& grid,
                                    const MinimizeOptions& opts) {
  if (std::find(fields.begin(), fields.end(), 0.0) == fields.end())
    throw ValidationError("diamagnetic check needs B = 0 among the fields");
  DiamagneticReport rep;
  const PekarSolution free_sol =
      minimize_pekar({{ZeroVectorPotential{}, v}, alpha, grid, nullptr}, opts);
  rep.solver_epsilon = free_sol.energy_error_estimate;
  std::vector<std::pair<double, double>> by_strength;
  for (double b : fields) {
    DiamagneticPoint pt;
    pt.field = b;
    if (b == 0.0) {
      pt.energy = free_sol.energy;
      pt.converged = free_sol.converged;
    } else {
      const PekarSolution s = minimize_pekar(
          {{ConstantMagneticField{{0.0, 0.0, b}}, v}, alpha, grid, nullptr},
          opts);
      pt.energy = s.energy;
      pt.converged = s.converged;
      rep.solver_epsilon = std::max(rep.solver_epsilon, s.energy_error_estimate);
    }
    pt.margin = pt.energy - free_sol.energy;
    rep.points.push_back(pt);
    by_strength.emplace_back(std::abs(b), pt.energy);
  }
  for (const auto& pt : rep.points)
    if (pt.margin < -rep.solver_epsilon) rep.ordered = false;
  std::sort(by_strength.begin(), by_strength.end());
  for (std::size_t i = 1; i < by_strength.size(); ++i)
    if (by_strength[i].second < by_strength[i - 1].second) rep.monotone = false;
  return rep;
}

WeakFieldReport weak_field_scan(const PotentialPair& pair,
                                const std::vector<double>& alphas,
                                const std::function<double(double)>& lambda,
                                const Grid3D& grid,
                                const MinimizeOptions& opts) {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw ValidationError("alphas must be positive");
    if (i > 0 && !(alphas[i] > alphas[i - 1]))
      throw ValidationError("alphas must be increasing");
  }
  WeakFieldReport rep;
  const PekarSolution free_sol =
      minimize_pekar({PotentialPair{}, 1.0, grid, nullptr}, opts);
  rep.reference = free_sol.energy;
  MinimizeOptions o = opts;
  o.initializer = Initializer::kProvided;
  o.start = free_sol.phi;
  double previous = std::numeric_limits<double>::infinity();
  for (double a : alphas) {
    const double lam = lambda ? lambda(a) : 1.0;
    const PotentialPair weak = scale_potentials(pair, 1.0 / a);
    WeakFieldPoint pt;
    pt.alpha = a;
    pt.lambda = lam;
    pt.envelope = std::pow(a, -0.2);
    if (is_zero(pair.vector_potential) && is_zero(pair.scalar_potential) &&
        lam == 1.0) {
      pt.energy = free_sol.energy;
      pt.converged = free_sol.converged;
    } else {
      const PekarSolution s = minimize_pekar(
          {{weak.vector_potential, scaled_by(weak.scalar_potential, lam)},
           lam * lam, grid, nullptr},
          o);
      pt.energy = s.energy;
      pt.converged = s.converged;
    }
    pt.deviation = pt.energy - rep.reference;
    if (!(std::abs(pt.deviation) < previous) &&
        !(pt.deviation == 0.0 && previous == 0.0))
      rep.monotone = false;
    previous = std::abs(pt.deviation);
    rep.points.push_back(pt);
  }
  return rep;
}

}  // namespace polaron::pekar
