#include <cmath>

#include "polaron/pekar.hpp"
#include "polaron/simd/kernels.hpp"

namespace polaron::pekar {
namespace {

class CoulombInteraction final : public SelfInteraction {
 public:
  explicit CoulombInteraction(const Grid3D& grid)
      : op_(CoulombOperator::shared(grid)) {}
  void potential(std::span<const double> rho,
                 std::span<double> out) const override {
    op_->potential(rho, out);
  }
  std::string describe() const override { return "coulomb"; }

 private:
  std::shared_ptr<const CoulombOperator> op_;
};

}  // namespace

std::shared_ptr<const SelfInteraction> coulomb_interaction(const Grid3D& grid) {
  return std::make_shared<CoulombInteraction>(grid);
}

PekarEvaluator::PekarEvaluator(const PekarProblem& problem)
    : problem_(problem),
      kinetic_(problem.grid, problem.pair.vector_potential),
      potential_(sample(problem.pair.scalar_potential, problem.grid)),
      interaction_(problem.interaction ? problem.interaction
                                       : coulomb_interaction(problem.grid)) {
  if (!(problem.alpha >= 0.0) || !std::isfinite(problem.alpha))
    throw ValidationError("coupling alpha must be non-negative and finite");
}

EnergyBreakdown PekarEvaluator::energy(std::span<const cplx> phi) const {
  const Grid3D& g = problem_.grid;
  if (phi.size() != g.size())
    throw ValidationError("state does not match the problem grid");
  const double dv = g.cell_volume();
  EnergyBreakdown e;
  e.kinetic = kinetic_.energy(phi);
  e.potential = simd::weighted_norm_sq(potential_, phi) * dv;
  if (problem_.alpha != 0.0) {
    RVec rho(g.size()), w(g.size());
    simd::abs_sq(phi, rho);
    interaction_->potential(rho, w);
    e.coulomb = simd::real_dot(rho, w) * dv;
  }
  e.total = e.kinetic + e.potential - problem_.alpha * e.coulomb;
  return e;
}

EnergyBreakdown PekarEvaluator::half_gradient(std::span<const cplx> phi,
                                              std::span<cplx> out) const {
  const Grid3D& g = problem_.grid;
  if (phi.size() != g.size() || out.size() != g.size())
    throw ValidationError("state does not match the problem grid");
  const double dv = g.cell_volume();
  EnergyBreakdown e;
  kinetic_.apply(phi, out);
  e.kinetic = simd::dot(phi, out).real() * dv;
  e.potential = simd::weighted_norm_sq(potential_, phi) * dv;
  RVec total_potential = potential_;
  if (problem_.alpha != 0.0) {
    RVec rho(g.size()), w(g.size());
    simd::abs_sq(phi, rho);
    interaction_->potential(rho, w);
    e.coulomb = simd::real_dot(rho, w) * dv;
    for (std::size_t i = 0; i < w.size(); ++i)
      total_potential[i] -= 2.0 * problem_.alpha * w[i];
  }
  simd::real_mul_acc(1.0, total_potential, phi, out);
  e.total = e.kinetic + e.potential - problem_.alpha * e.coulomb;
  return e;
}

EnergyBreakdown pekar_breakdown(const ComplexField3D& phi,
                                const PekarProblem& problem) {
  if (!phi.grid.matches(problem.grid))
    throw ValidationError("state grid differs from the problem grid");
  return PekarEvaluator(problem).energy(phi.values);
}

double pekar_energy(const ComplexField3D& phi, const PekarProblem& problem) {
  return pekar_breakdown(phi, problem).total;
}

ComplexField3D pekar_gradient(const ComplexField3D& phi,
                              const PekarProblem& problem) {
  if (!phi.grid.matches(problem.grid))
    throw ValidationError("state grid differs from the problem grid");
  ComplexField3D out(problem.grid);
  PekarEvaluator(problem).half_gradient(phi.values, out.values);
  for (auto& v : out.values) v *= 2.0;
  return out;
}

}  // namespace polaron::pekar
