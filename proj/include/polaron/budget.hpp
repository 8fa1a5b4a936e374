#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polaron/common.hpp"

namespace polaron::budget {

struct BoundParams {
  double alpha = 0.0;
  double Lambda = 0.0;  // phonon momentum cutoff
  double delta = 0.0;   // share of the number operator spent on block errors
  double P = 0.0;       // block side length in momentum space
  double DeltaE = 0.0;  // localization energy
};

// Throws ValidationError unless every field is positive and finite,
// Lambda > 8 alpha / pi and delta < 1.
void validate(const BoundParams& p);

struct BoundBudget {
  BoundParams params;
  double beta = 0.0;  // 1 - 8 alpha / (pi Lambda)
  double L = 0.0;     // pi sqrt(3 beta / DeltaE)
  double mu = 0.0;    // alpha / (beta (1 - delta))
  double block_count = 0.0;  // |Lambda_P|, an exact integer below 2^53
  double weight_sum = 0.0;   // sum of M_n^2 = 4 pi Lambda
  double block_error = 0.0;  // 9 alpha P^2 L^2 Lambda / (2 pi delta)
  double localization_error = 0.0;  // DeltaE
  double semibound_error = 0.5;
  double pekar_term = 0.0;  // beta E_P(A, V / beta, mu)
  double total = 0.0;
  bool diverged = false;
  std::vector<std::string> divergent_terms;
};

// Fills beta, L, mu and the closed-form error terms; pekar_term and total
// stay zero.
BoundBudget derived_params(const BoundParams& p);

// Lambda = (8/pi) alpha^{6/5}, delta = alpha^{-1/5}, P = alpha^{3/5},
// DeltaE = alpha^{9/5}; requires alpha > 1.
BoundParams paper_parameter_choice(double alpha);

// Number of n in Z^3 whose closed cell |k_i - n_i P| <= P/2 meets the closed
// ball |k| <= Lambda. Column counting, O((Lambda/P)^2).
double block_count(double Lambda, double P);
// Largest Lambda / P accepted by block_count.
inline constexpr double kMaxCountRatio = 4.0e4;

struct BlockCell {
  std::array<int, 3> index{};
  double weight = 0.0;       // M_n = (int_{B(n)} dk / |k|^2)^{1/2}
  Vec3 representative{};     // k_n: centroid of B(n) under dk / |k|^2
};

struct BlockPartition {
  double Lambda = 0.0;
  double P = 0.0;
  std::vector<BlockCell> cells;  // sorted by index
  double weight_sum = 0.0;       // sum of weight^2
};

// Enumerates Lambda_P and integrates every cell clipped to the ball.
BlockPartition block_partition(double Lambda, double P,
                               std::size_t max_cells = 100000);

struct CellIntegrals {
  double weight_sq = 0.0;  // int dk / |k|^2
  Vec3 moment{};           // int k dk / |k|^2
};
// Integrals over B(n) by nested adaptive quadrature with the k_z integral
// done in closed form.
CellIntegrals cell_integrals(double Lambda, double P,
                             const std::array<int, 3>& n, double rel_tol = 1e-10);

struct PhaseBoundReport {
  double max_deviation = 0.0;  // max |e^{ikx} - e^{ik_n x}|
  double paper_bound = 0.0;    // 3 P L / 2
  double centered_bound = 0.0; // 3 P L / 4, valid for a cell-centred k_n
  double product_bound = 0.0;  // max |k - k_n| |x| over the samples
  std::size_t violations = 0;  // samples above min(2, paper_bound)
};

// Samples x in the cube of side L and k - k_n = u - offset with u uniform in
// [-P/2, P/2]^3; offset is k_n relative to the cell center.
PhaseBoundReport phase_bound_check(double P, double L, std::size_t samples,
                                   std::uint64_t seed = 0,
                                   const Vec3& representative_offset = {});

class LocalizationProfile {
 public:
  explicit LocalizationProfile(double L);

  double side() const { return L_; }
  // prod_j cos(pi x_j / L) on the cube |x_j| <= L/2, zero outside.
  double value(const Vec3& x) const;
  // 3 (pi / L)^2, so -Laplacian phi = eigenvalue() phi inside the cube.
  double eigenvalue() const;
  // Quasi-Monte Carlo (Sobol) estimate of int phi(x - y)^2 dy.
  double partition_integral(const Vec3& x, std::size_t samples) const;

 private:
  double L_;
};

// E_P(A, f V, c) for fixed fields (A, V): f scales the potential, c is the
// coupling in front of the self-interaction.
using PekarOracle = std::function<double(double potential_factor, double coupling)>;

// A = V = 0 with E_P(0, 0, c) = c^2 e_P.
PekarOracle free_pekar_oracle(double e_p);
// Oracle for the scaled fields (A_s, V_s):
// E_P(A_s, f V_s, c) = s^2 E_P(A, f V, c / s).
PekarOracle scaled_oracle(PekarOracle base, double s);

// Full lower-bound budget
// total = pekar_term - |Lambda_P| - block_error - DeltaE - 1/2.
BoundBudget lower_bound_total(const BoundParams& p, const PekarOracle& oracle);

struct OptimizeResult {
  BoundParams params;
  BoundBudget budget;
  double error = 0.0;        // upper - total with upper = alpha^2 E_P(A, V)
  double paper_error = 0.0;  // same for paper_parameter_choice
  int evaluations = 0;
};

// Nelder-Mead over (Lambda, delta, P, DeltaE) in unconstrained coordinates.
// The search uses the Steiner-volume estimate of |Lambda_P|; the returned
// budget uses the exact count and falls back to the paper choice if that is
// better.
OptimizeResult optimize_params(double alpha, const PekarOracle& oracle);

struct SandwichRow {
  double alpha = 0.0;
  double upper = 0.0;  // alpha^2 E_P(A, V)
  double lower = 0.0;  // lower_bound_total for (A_alpha, V_alpha)
  double gap = 0.0;
  double scaled_gap = 0.0;  // gap / alpha^{9/5}
  // E_P(A, V) - E_P(A, V / beta, beta^{-2}), the concavity correction.
  double concavity_correction = 0.0;
  BoundBudget budget;
};

std::vector<SandwichRow> sandwich_report(const std::vector<double>& alphas,
                                         const PekarOracle& oracle);

// Least-squares slope of log y against log x.
double fitted_exponent(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace polaron::budget
