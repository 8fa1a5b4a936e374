#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polaron/coulomb.hpp"
#include "polaron/grid.hpp"
#include "polaron/kinetic.hpp"
#include "polaron/potentials.hpp"

namespace polaron::pekar {

// Quadratic self-interaction D(rho, rho) = h^3 sum rho W[rho] with a linear,
// symmetric potential map rho -> W[rho].
class SelfInteraction {
 public:
  virtual ~SelfInteraction() = default;
  virtual void potential(std::span<const double> rho,
                         std::span<double> out) const = 0;
  virtual std::string describe() const = 0;
};

// Free-space 1/|x| on the grid (shared CoulombOperator).
std::shared_ptr<const SelfInteraction> coulomb_interaction(const Grid3D& grid);

struct PekarProblem {
  PotentialPair pair;
  double alpha = 1.0;  // coupling in front of D(rho, rho)
  Grid3D grid;
  // nullptr selects the Coulomb interaction.
  std::shared_ptr<const SelfInteraction> interaction;
};

struct EnergyBreakdown {
  double kinetic = 0.0;
  double potential = 0.0;
  double coulomb = 0.0;  // D(|phi|^2, |phi|^2)
  double total = 0.0;    // kinetic + potential - alpha coulomb
};

// Samples the fields once and evaluates the functional repeatedly.
class PekarEvaluator {
 public:
  explicit PekarEvaluator(const PekarProblem& problem);

  const PekarProblem& problem() const { return problem_; }
  const KineticOperator& kinetic() const { return kinetic_; }
  const RVec& potential() const { return potential_; }
  const SelfInteraction& interaction() const { return *interaction_; }

  EnergyBreakdown energy(std::span<const cplx> phi) const;
  // out = (D_A^2 + V - 2 alpha W[|phi|^2]) phi, half the functional gradient.
  EnergyBreakdown half_gradient(std::span<const cplx> phi,
                                std::span<cplx> out) const;

 private:
  PekarProblem problem_;
  KineticOperator kinetic_;
  RVec potential_;
  std::shared_ptr<const SelfInteraction> interaction_;
};

double pekar_energy(const ComplexField3D& phi, const PekarProblem& problem);
EnergyBreakdown pekar_breakdown(const ComplexField3D& phi,
                                const PekarProblem& problem);
// Unconstrained gradient 2 (D_A^2 + V - 2 alpha W[|phi|^2]) phi.
ComplexField3D pekar_gradient(const ComplexField3D& phi,
                              const PekarProblem& problem);

enum class Initializer {
  kGaussian,        // optimal isotropic Gaussian, then full descent
  kGaussianFamily,  // optimal isotropic Gaussian only, no descent
  kProvided,        // MinimizeOptions::start, resampled onto the grid
};

struct MinimizeOptions {
  double tolerance = 1e-6;  // relative tangent residual
  int max_iterations = 2000;
  int restarts = 0;  // extra deterministic perturbed starts
  Initializer initializer = Initializer::kGaussian;
  std::optional<ComplexField3D> start;
  std::uint64_t seed = 0;
};

struct PekarSolution {
  explicit PekarSolution(const Grid3D& grid) : phi(grid) {}

  double energy = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double coulomb = 0.0;
  double alpha = 1.0;
  ComplexField3D phi;
  // ||r|| / (T + |lambda| + (2 pi / extent)^2), r = H phi - lambda phi
  double projected_residual = 0.0;
  // <r, P r> with the preconditioner P; estimates energy - discrete minimum.
  double energy_error_estimate = 0.0;
  double multiplier = 0.0;  // lambda
  int iterations = 0;
  bool converged = false;
  int restart_index = 0;
  std::vector<std::pair<int, double>> trace;
};

PekarSolution minimize_pekar(const PekarProblem& problem,
                             const MinimizeOptions& opts = {});

// Isotropic Gaussian (2a/pi)^{3/4} exp(-a |x - c|^2).
ComplexField3D gaussian_state(const Grid3D& grid, double a, const Vec3& center);

struct GaussianFamilyOptimum {
  double width_parameter = 0.0;  // a
  Vec3 center{};
  double energy = 0.0;
};

// Continuum energy of the isotropic Gaussian family, in closed form for the
// analytic field variants (sampled fields fall back to grid quadrature on
// `grid`), minimized over a with the center fixed at the potential's center.
double gaussian_family_energy(double a, const Vec3& center,
                              const PotentialPair& pair, double alpha);
GaussianFamilyOptimum gaussian_family_minimum(const PotentialPair& pair,
                                              double alpha,
                                              const Grid3D* grid = nullptr);

// Default box: 12 times the rms radius of the optimal Gaussian.
double default_extent(const PotentialPair& pair, double alpha);

struct ScalingReport {
  explicit ScalingReport(const Grid3D& grid) : scaled(grid), base(grid) {}

  double lhs = 0.0;  // E_P(A_s, V_s, s * alpha) on the grid shrunk by s
  double rhs = 0.0;  // s^2 E_P(A, V, alpha)
  double deviation = 0.0;  // |lhs - rhs| / |rhs|
  PekarSolution scaled;
  PekarSolution base;
};

ScalingReport scaling_check(const PekarProblem& problem, double s,
                            const MinimizeOptions& opts = {});

struct ScanPoint {
  double parameter = 0.0;
  double energy = 0.0;
  double residual = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct ConcavityReport {
  std::vector<ScanPoint> points;          // E_P(A, lambda V, lambda^2)
  std::vector<double> second_differences; // nonuniform, per unit lambda^2
  double solver_epsilon = 0.0;  // max energy error estimate along the scan
  bool concave = true;          // all second differences <= 2 epsilon
};

ConcavityReport concavity_scan(const PotentialPair& pair,
                               const std::vector<double>& lambdas,
                               const Grid3D& grid,
                               const MinimizeOptions& opts = {});

struct DiamagneticPoint {
  double field = 0.0;  // B = (0, 0, field)
  double energy = 0.0;
  double margin = 0.0;  // E_P(B) - E_P(0)
  bool converged = false;
};

struct DiamagneticReport {
  std::vector<DiamagneticPoint> points;
  double solver_epsilon = 0.0;
  bool ordered = true;    // every margin >= -epsilon
  bool monotone = true;   // energies non-decreasing in |B| (reported only)
};

DiamagneticReport diamagnetic_check(const ScalarPotentialSpec& v,
                                    const std::vector<double>& fields,
                                    double alpha, const Grid3D& grid,
                                    const MinimizeOptions& opts = {});

struct WeakFieldPoint {
  double alpha = 0.0;
  double lambda = 1.0;
  double energy = 0.0;     // E_P(A_{1/alpha}, lambda V_{1/alpha}, lambda^2)
  double deviation = 0.0;  // energy - free reference on the same grid
  double envelope = 0.0;   // alpha^{-1/5}
  bool converged = false;
};

struct WeakFieldReport {
  double reference = 0.0;  // free minimum on the grid
  std::vector<WeakFieldPoint> points;
  bool monotone = true;    // |deviation| decreasing along the scan
};

WeakFieldReport weak_field_scan(const PotentialPair& pair,
                                const std::vector<double>& alphas,
                                const std::function<double(double)>& lambda,
                                const Grid3D& grid,
                                const MinimizeOptions& opts = {});

}  // namespace polaron::pekar
