#pragma once
// Truncated Fock-space toy of the block Hamiltonian
//
//   beta D_A^2 + V + (1 - delta) sum_n a_n* a_n
//     + sum_n g_n (e^{i k_n x} a_n + e^{-i k_n x} a_n*),  g_n = sqrt(alpha) M_n / (sqrt(2) pi)
//
// on (electron grid nodes) x prod_n {0..cutoff_n}. States are plain l2 vectors
// with the electron node index fastest; the h^3 weight of grid fields is not
// applied here.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "polaron/budget.hpp"
#include "polaron/grid.hpp"
#include "polaron/kinetic.hpp"
#include "polaron/pekar.hpp"
#include "polaron/potentials.hpp"

namespace polaron::fock {

struct Mode {
  std::array<int, 3> index{};
  double weight = 0.0;  // M_n
  Vec3 representative{};  // k_n
};

struct ModeSet {
  double Lambda = 0.0;
  double P = 0.0;
  std::vector<Mode> modes;

  std::size_t size() const { return modes.size(); }
  double weight_sum() const;  // sum M_n^2
};

// Throws unless every weight is positive and sum M_n^2 <= 4 pi Lambda + tol.
void validate(const ModeSet& modes, double tol = 1e-9);

// The `count` heaviest cells of the partition, ties broken by index order.
ModeSet select_modes(const budget::BlockPartition& partition, std::size_t count);
ModeSet select_modes(double Lambda, double P, std::size_t count);

enum class SnapPolicy { kReject, kSnap };

struct SnapResult {
  ModeSet modes;
  std::vector<std::string> warnings;  // one per moved representative
};

// Moves each k_n to the nearest vector 2 pi m / extent of the periodic grid.
// kReject throws for any k_n further than tol from the lattice.
SnapResult snap_to_lattice(const ModeSet& modes, const Grid3D& grid,
                           SnapPolicy policy, double tol = 1e-9);

inline double coupling_constant(double alpha, double weight) {
  return std::sqrt(alpha) * weight / (std::sqrt(2.0) * kPi);
}

struct BlockParams {
  double alpha = 1.0;
  double beta = 1.0;
  double delta = 0.0;
  PotentialPair pair;
  std::vector<int> cutoffs;  // one per mode; a single entry applies to all
  SnapPolicy snap = SnapPolicy::kSnap;
};

class TruncatedFockOperator {
 public:
  // Phonon sector for a frozen electron: nu sum b_j* b_j
  //   + sum_j (c_j b_j + conj(c_j) b_j*).
  static TruncatedFockOperator phonon_sector(double number_coefficient,
                                             std::vector<cplx> couplings,
                                             std::vector<int> cutoffs);

  std::size_t dimension() const { return nodes_ * blocks_; }
  std::size_t electron_nodes() const { return nodes_; }
  std::size_t boson_blocks() const { return blocks_; }
  // Entries of the equivalent assembled matrix, counting the electron operator
  // by its per-axis row width.
  double nonzeros() const;
  std::size_t mode_count() const { return cutoffs_.size(); }
  const std::vector<int>& cutoffs() const { return cutoffs_; }
  const ModeSet& modes() const { return modes_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const std::vector<cplx>& couplings() const { return couplings_; }
  const BlockParams& params() const { return params_; }
  // Occupation numbers of boson block b.
  std::vector<int> occupations(std::size_t block) const;

  void apply(std::span<const cplx> in, std::span<cplx> out) const;
  // <psi, H psi> / <psi, psi>
  double expectation(std::span<const cplx> psi) const;
  // Column by column through apply; meant for small dimensions.
  Eigen::SparseMatrix<cplx> assemble() const;
  // max |H - H^dagger| of the assembled matrix.
  double hermiticity_error() const;

 private:
  TruncatedFockOperator() = default;
  friend TruncatedFockOperator build_block_hamiltonian(const Grid3D&,
                                                       const ModeSet&,
                                                       const BlockParams&);
  void init_blocks();
  void apply_electron(const cplx* in, cplx* out, double shift,
                      CVec& spec) const;

  BlockParams params_;
  ModeSet modes_;
  std::vector<std::string> warnings_;
  std::optional<Grid3D> grid_;
  std::shared_ptr<const KineticOperator> kinetic_;
  RVec potential_;
  std::vector<double> laplacian_symbol_;  // used when A = 0
  std::size_t nodes_ = 1;
  std::size_t blocks_ = 1;
  std::vector<int> cutoffs_;
  std::vector<std::size_t> strides_;
  double number_coefficient_ = 0.0;
  std::vector<cplx> couplings_;          // per mode
  std::vector<CVec> phases_;             // e^{i k_n x} per mode; empty for a frozen electron
};

TruncatedFockOperator build_block_hamiltonian(const Grid3D& grid,
                                              const ModeSet& modes,
                                              const BlockParams& params);

struct GroundStateOptions {
  double tolerance = 1e-8;     // ||H v - E v|| for unit v
  int krylov_size = 120;       // Lanczos steps per restart
  int max_matvecs = 20000;
  double max_nonzeros = 1e7;
  std::uint64_t seed = 0;
  std::optional<CVec> start;
};

struct GroundState {
  double energy = 0.0;
  CVec state;  // unit l2 norm
  double residual = 0.0;
  int matvecs = 0;
  int restarts = 0;
  bool converged = false;
};

// Restarted Lanczos holding four vectors; the Ritz vector is rebuilt by a
// second pass over the recurrence. Throws ValidationError when the operator
// exceeds max_nonzeros.
GroundState ground_state(const TruncatedFockOperator& op,
                         const GroundStateOptions& opts = {});

// rho_hat(k) = h^3 sum rho(x) e^{i k x}
cplx density_transform(const RealField3D& rho, const Vec3& k);

// Self-interaction sum_n M_n^2 |rho_hat(k_n)|^2 / (2 pi^2), the block
// discretization of D(rho, rho).
std::shared_ptr<const pekar::SelfInteraction> mode_sum_interaction(
    const Grid3D& grid, const ModeSet& modes);

struct CoherentIdentityReport {
  double lanczos_min = 0.0;
  double closed_form = 0.0;  // -(alpha / (2 pi^2 (1 - delta))) sum M^2 |rho_hat|^2
  double deviation = 0.0;
  double max_shift_sq = 0.0;  // max |g rho_hat / (1 - delta)|^2
  std::vector<cplx> amplitudes;  // rho_hat(k_n)
};

CoherentIdentityReport coherent_minimization_identity(
    const RealField3D& rho, const ModeSet& modes, double alpha, double delta,
    int cutoff, const GroundStateOptions& opts = {});

struct Quadrature {
  double radius = 6.0;
  int points = 96;  // Gauss-Legendre nodes on [0, radius]
  int angles = 0;   // trapezoid nodes; 0 picks 2 cutoff + 2
};

struct ResolutionReport {
  double vacuum = 0.0;              // |<0|int |z><z||0> - 1|
  double identity_diagonal = 0.0;   // m_i <= cutoff / 2
  double identity_off_diagonal = 0.0;
  double number_diagonal = 0.0;     // against a_1* a_1, m_i <= cutoff / 2
  double number_off_diagonal = 0.0;
};

// Integrates |z><z| and (|z_1|^2 - 1)|z><z| over mode_count complex planes
// and compares with the identity and a_1* a_1 on the truncated space.
ResolutionReport resolution_checks(int mode_count, int cutoff,
                                   const Quadrature& quad = {});

struct CsquaresParams {
  double P = 1.0;
  std::array<int, 3> cell{1, 0, 0};
  int submodes = 3;  // slabs of the cell along k_x
  double delta = 0.5;
  double alpha = 1.0;
  double L = 1.0;    // electron positions in [-L/2, L/2]^3
  int cutoff = 6;
  int states = 100;
  std::uint64_t seed = 0;
};

struct CsquaresReport {
  double min_expectation = 0.0;  // over the random states
  double vacuum_expectation = 0.0;  // at the first sampled position
  // Lowest eigenvalue of the form, minimized over the sampled positions.
  double ground_minimum = 0.0;
  double penalty = 0.0;  // (alpha / (2 pi^2 delta)) (3 P L / 2)^2 sum_j w_j
  int samples = 0;
};

// LHS - RHS of the completion of squares on one cell, with sub-mode weights
// w_j = vol_j / |k_j|^2 standing in for both dk / |k|^2 integrals.
CsquaresReport csquares_check(const CsquaresParams& p);

struct OrderingReport {
  double E_toy = 0.0;
  double E_product = 0.0;   // phi x (truncated optimal eta) on the Pekar minimizer
  double E_coherent = 0.0;  // same with untruncated coherent states
  double E_pekar_discrete = 0.0;  // min E_P(A, V / beta, mu) with the mode sum
  double lower = 0.0;       // beta E_pekar_discrete - |modes|
  double mu = 0.0;
  bool upper_holds = false;  // E_toy <= E_product
  bool lower_holds = false;  // E_toy >= lower
  GroundState ground;
  std::vector<std::string> warnings;
};

OrderingReport pekar_ordering_check(const Grid3D& grid, const ModeSet& modes,
                                    const BlockParams& params,
                                    const GroundStateOptions& opts = {},
                                    const pekar::MinimizeOptions& pekar_opts = {});

struct LocalizationReport {
  double delta_E = 0.0;              // 3 beta (pi / L)^2
  double partition = 0.0;            // h^3 sum_y phi_y(x)^2
  double continuum_partition = 0.0;  // (L / 2)^3
  // |direct - IMS| / scale, maximized over states
  double max_deviation = 0.0;
  // |sum_y <phi_y psi, (h - E - dE) phi_y psi> h^3| / (partition (|E| + dE))
  double max_continuum_residual = 0.0;
  std::vector<double> sums;  // direct sums per state
};

// Every state is normalized internally; L must be a whole number of grid
// spacings and at most the extent.
LocalizationReport localization_average_check(
    const Grid3D& grid, double L, const PotentialPair& pair, double beta,
    const std::vector<ComplexField3D>& states);

std::vector<ComplexField3D> random_electron_states(const Grid3D& grid,
                                                   int count,
                                                   std::uint64_t seed);

}  // namespace polaron::fock
