#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "polaron/coulomb.hpp"
#include "polaron/grid.hpp"
#include "polaron/kinetic.hpp"
#include "polaron/pekar.hpp"
#include "polaron/potentials.hpp"

namespace polaron::bipolaron {

inline constexpr int kDefaultMaxRank = 4;

struct BipolaronProblem {
  PotentialPair pair;
  double U = 0.0;      // repulsion strength
  double alpha = 1.0;  // coupling in front of D(rho, rho)
  Grid3D grid;
};

// phi(x, y) = sum_k c_k f_k(x) f_k(y), symmetric by construction.
struct SeparableAnsatz {
  std::vector<double> coefficients;
  std::vector<ComplexField3D> factors;

  int rank() const { return static_cast<int>(factors.size()); }
  // sum_kl c_k c_l <f_k, f_l>^2
  double norm_sq() const;
  void normalize();
};

SeparableAnsatz product_ansatz(const ComplexField3D& f);

struct PtBreakdown {
  double one_body = 0.0;    // <phi, (h_x + h_y) phi>, h = D_A^2 + V
  double kinetic = 0.0;     // kinetic part of one_body
  double repulsion = 0.0;   // U <phi, |x - y|^{-1} phi>
  double attraction = 0.0;  // D(rho, rho)
  double total = 0.0;       // one_body + repulsion - alpha attraction
};

// Samples the fields once; energies are evaluated at phi / ||phi||.
class PtEvaluator {
 public:
  explicit PtEvaluator(const BipolaronProblem& problem,
                       int max_rank = kDefaultMaxRank);

  const BipolaronProblem& problem() const { return problem_; }
  const KineticOperator& kinetic() const { return kinetic_; }

  PtBreakdown energy(const SeparableAnsatz& a) const;
  // Real gradients g_m with dE = sum_m Re <g_m, delta f_m>.
  PtBreakdown gradient(const SeparableAnsatz& a,
                       std::vector<ComplexField3D>& grads) const;

 private:
  void check(const SeparableAnsatz& a) const;

  BipolaronProblem problem_;
  int max_rank_;
  KineticOperator kinetic_;
  RVec potential_;
  std::shared_ptr<const CoulombOperator> coulomb_;
};

PtBreakdown pt_energy(const SeparableAnsatz& a, const BipolaronProblem& problem,
                      int max_rank = kDefaultMaxRank);

// 2 (T + V) + (U - 4 alpha) D(|f|^2, |f|^2) for normalized f.
double product_energy(const ComplexField3D& f, const BipolaronProblem& problem);

struct PtOptions {
  double tolerance = 1e-6;  // relative tangent residual
  int max_iterations = 3000;
  int sweep_length = 50;  // factor iterations between coefficient updates
  int max_rank = kDefaultMaxRank;
  std::optional<SeparableAnsatz> start;
  std::uint64_t seed = 0;
  pekar::MinimizeOptions pekar;  // for the rank-1 seed
};

struct PtSolution {
  double energy = 0.0;
  PtBreakdown breakdown;
  SeparableAnsatz ansatz;
  double residual = 0.0;
  int iterations = 0;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> sweep_energies;  // non-increasing
};

PtSolution minimize_pt(const BipolaronProblem& problem, int rank,
                       const PtOptions& opts = {});

struct PtScalingReport {
  double lhs = 0.0;  // E_PT(A_s, V_s, s U, s) on the grid shrunk by s
  double rhs = 0.0;  // s^2 E_PT(A, V, U, 1)
  double deviation = 0.0;
};

PtScalingReport pt_scaling_check(const BipolaronProblem& problem, double s,
                                 int rank, const PtOptions& opts = {});

struct BindingOptions {
  int rank = 2;
  int coarse_points = 48;
  int fine_points = 64;
  double extent = 0.0;  // 0 selects pekar::default_extent at coupling 1, capped
  Boundary boundary = Boundary::kFreeSpace;
  PtOptions pt;
  // Replaces pekar::minimize_pekar for the single-polaron solves when set.
  std::function<pekar::PekarSolution(const pekar::PekarProblem&,
                                     const pekar::MinimizeOptions&)>
      pekar_solver;
};

struct EnergyEstimate {
  double coarse = 0.0, fine = 0.0;
  double extrapolated = 0.0;  // Richardson, second order in h
  double error = 0.0;         // |extrapolated - fine|
};

struct BindingReport {
  double u = 0.0;
  EnergyEstimate pekar;    // E_P(A, V), single polaron at alpha = 1
  EnergyEstimate pt;       // E_PT upper bound at U = u
  double twice_EP = 0.0;   // 2 pekar.fine
  double EPT_upper = 0.0;  // pt.fine
  double gap = 0.0;        // twice_EP - EPT_upper
  double gap_extrapolated = 0.0;
  double error_bar = 0.0;  // 2 pekar.error + pt.error
  bool certified = false;  // gap > error_bar
  bool converged = false;  // every Pekar and PT solve behind this row
};

BindingReport binding_gap(const PotentialPair& pair, double u,
                          const BindingOptions& opts = {});

// One box for all u; the Pekar estimate is shared and PT solves warm-start.
std::vector<BindingReport> binding_scan(const PotentialPair& pair,
                                        const std::vector<double>& us,
                                        const BindingOptions& opts = {});

struct ThresholdScan {
  double lower = 0.0;  // largest u with a certified positive gap
  double upper = 0.0;  // smallest u without a certified gap
  std::vector<BindingReport> curve;
};

// Bisection on the sign of the certified gap over [u_min, u_max].
ThresholdScan threshold_scan(const PotentialPair& pair, double u_min,
                             double u_max, double resolution,
                             const BindingOptions& opts = {});

}  // namespace polaron::bipolaron
