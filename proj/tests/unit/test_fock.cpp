#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include "oracles/fock_dense.hpp"
#include "polaron/fock.hpp"

using namespace polaron;
using namespace polaron::fock;

namespace {

const Grid3D& toy_grid() {
  static const Grid3D g(8, 8.0, Boundary::kPeriodic);
  return g;
}

// Heaviest 7 cells of a partition whose cell size equals the reciprocal
// lattice spacing of the toy grid.
const ModeSet& toy_modes() {
  static const ModeSet m = select_modes(4.0, 2.0 * kPi / 8.0, 7);
  return m;
}

ModeSet first_modes(std::size_t count, std::size_t skip = 0) {
  ModeSet m = toy_modes();
  m.modes.assign(toy_modes().modes.begin() + skip,
                 toy_modes().modes.begin() + skip + count);
  return snap_to_lattice(m, toy_grid(), SnapPolicy::kSnap).modes;
}

CVec random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  CVec v(n);
  for (auto& z : v) z = {d(gen), d(gen)};
  return v;
}

}  // namespace

TEST_CASE("mode selection and lattice snapping") {
  const ModeSet& m = toy_modes();
  CHECK(m.size() == 7);
  CHECK(m.weight_sum() <= 4.0 * kPi * m.Lambda);
  int origin = 0;
  for (const Mode& mode : m.modes) {
    CHECK(mode.weight > 0.0);
    int l1 = 0;
    for (int c : mode.index) l1 += std::abs(c);
    CHECK(l1 <= 1);
    origin += l1 == 0;
  }
  CHECK(origin == 1);

  const SnapResult s = snap_to_lattice(m, toy_grid(), SnapPolicy::kSnap);
  CHECK(s.warnings.size() == 6);  // the origin cell's centroid is already on the lattice
  const double dk = 2.0 * kPi / toy_grid().extent();
  for (const Mode& mode : s.modes.modes)
    for (int d = 0; d < 3; ++d) {
      CHECK(mode.representative[d] / dk == doctest::Approx(mode.index[d]).epsilon(1e-12));
    }
  CHECK_THROWS_AS(snap_to_lattice(m, toy_grid(), SnapPolicy::kReject), ValidationError);
  CHECK_NOTHROW(snap_to_lattice(s.modes, toy_grid(), SnapPolicy::kReject));
  CHECK_THROWS_AS(snap_to_lattice(m, Grid3D(8, 8.0, Boundary::kFreeSpace), SnapPolicy::kSnap),
                  ValidationError);

  ModeSet bad = m;
  bad.modes[0].weight = -1.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = m;
  bad.Lambda = 0.01;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  CHECK_THROWS_AS(select_modes(4.0, 2.0 * kPi / 8.0, 0), ValidationError);
}

TEST_CASE("block hamiltonian matches the dense oracle") {
  const PotentialPair coulomb{ZeroVectorPotential{}, CoulombPotential{1.0, {0.3, -0.2, 0.1}}};
  for (int count : {1, 2}) {
    const ModeSet modes = first_modes(count, 1);
    const int cutoff = 1;
    BlockParams bp;
    bp.alpha = 1.7;
    bp.beta = 0.6;
    bp.delta = 0.3;
    bp.pair = coulomb;
    bp.cutoffs = {cutoff};
    const auto op = build_block_hamiltonian(toy_grid(), modes, bp);
    const Eigen::MatrixXcd dense = oracle::dense_block_hamiltonian(
        toy_grid(), modes, bp.alpha, bp.beta, bp.delta, coulomb, cutoff);
    const Eigen::MatrixXcd assembled = Eigen::MatrixXcd(op.assemble());
    CHECK((assembled - dense).cwiseAbs().maxCoeff() < 1e-11);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense, Eigen::EigenvaluesOnly);
    const GroundState gs = ground_state(op);
    CHECK(gs.converged);
    CHECK(gs.residual < 1e-8);
    CHECK(gs.energy == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-10));
  }
}

TEST_CASE("block hamiltonian properties") {
  SUBCASE("dimension") {
    BlockParams bp;
    bp.cutoffs = {8};
    const auto op = build_block_hamiltonian(toy_grid(), first_modes(1, 1), bp);
    CHECK(op.dimension() == 4608);
    CHECK(op.electron_nodes() == 512);
    CHECK(op.boson_blocks() == 9);
  }
  SUBCASE("hermitian for random parameters") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int draw = 0; draw < 3; ++draw) {
      BlockParams bp;
      bp.alpha = 3.0 * u(gen);
      bp.beta = 0.2 + u(gen);
      bp.delta = 0.9 * u(gen);
      bp.pair = {ConstantMagneticField{{0.0, 0.2 * u(gen), 0.5 * u(gen)}},
                 GaussianWell{-u(gen), 1.0 + u(gen), {0.2, 0.0, -0.3}}};
      bp.cutoffs = {1 + draw % 2, 2};
      const auto op = build_block_hamiltonian(toy_grid(), first_modes(2, draw), bp);
      CHECK(op.hermiticity_error() < 1e-12);
    }
  }
  SUBCASE("decoupled at zero coupling") {
    const PotentialPair well{ZeroVectorPotential{}, GaussianWell{-2.0, 1.2, {}}};
    BlockParams bp;
    bp.alpha = 0.0;
    bp.beta = 0.8;
    bp.delta = 0.4;
    bp.pair = well;
    bp.cutoffs = {2};
    const auto op = build_block_hamiltonian(toy_grid(), first_modes(2), bp);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        oracle::electron_matrix(toy_grid(), bp.beta, well), Eigen::EigenvaluesOnly);
    const GroundState gs = ground_state(op);
    CHECK(gs.converged);
    CHECK(gs.energy == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-10));
    // phonon vacuum
    double excited = 0.0;
    for (std::size_t i = op.electron_nodes(); i < gs.state.size(); ++i)
      excited += std::norm(gs.state[i]);
    CHECK(excited < 1e-14);
  }
  SUBCASE("errors") {
    BlockParams bp;
    bp.cutoffs = {0};
    CHECK_THROWS_AS(build_block_hamiltonian(toy_grid(), first_modes(1), bp), ValidationError);
    bp.cutoffs = {1, 1};
    CHECK_THROWS_AS(build_block_hamiltonian(toy_grid(), first_modes(3), bp), ValidationError);
    bp.cutoffs = {1};
    bp.delta = 1.0;
    CHECK_THROWS_AS(build_block_hamiltonian(toy_grid(), first_modes(1), bp), ValidationError);
    bp.delta = 0.0;
    bp.snap = SnapPolicy::kReject;
    CHECK_THROWS_AS(build_block_hamiltonian(toy_grid(), toy_modes(), bp), ValidationError);
  }
}

TEST_CASE("ground state solver") {
  SUBCASE("displaced oscillator") {
    for (double g : {0.3, 0.8, 1.3}) {
      const auto op = TruncatedFockOperator::phonon_sector(1.0, {cplx{g, 0.0}}, {40});
      const GroundState gs = ground_state(op);
      CHECK(gs.converged);
      CHECK(std::abs(gs.energy + g * g) < 1e-8);
    }
    // Through the block coupling constant with the weight of one mode.
    const double M = toy_modes().modes[3].weight;
    const double g = coupling_constant(1.0, M);
    const auto op = TruncatedFockOperator::phonon_sector(1.0, {cplx{0.0, g}}, {30});
    CHECK(std::abs(ground_state(op).energy + g * g) < 1e-8);
  }
  SUBCASE("variational principle") {
    BlockParams bp;
    bp.cutoffs = {2};
    bp.delta = 0.2;
    const auto op = build_block_hamiltonian(toy_grid(), first_modes(2), bp);
    const GroundState gs = ground_state(op);
    REQUIRE(gs.converged);
    for (unsigned s = 0; s < 50; ++s) {
      const CVec psi = random_vector(op.dimension(), 100 + s);
      CHECK(gs.energy <= op.expectation(psi));
    }
  }
  SUBCASE("monotone in cutoff and mode count") {
    BlockParams bp;
    bp.alpha = 2.0;
    bp.delta = 0.25;
    double previous = 1e300;
    for (int cutoff : {1, 2, 4}) {
      bp.cutoffs = {cutoff};
      const GroundState gs = ground_state(build_block_hamiltonian(toy_grid(), first_modes(2), bp));
      CHECK(gs.energy <= previous + 1e-10);
      previous = gs.energy;
    }
    bp.cutoffs = {2};
    previous = 1e300;
    for (std::size_t count : {1u, 2u, 3u}) {
      const GroundState gs =
          ground_state(build_block_hamiltonian(toy_grid(), first_modes(count), bp));
      CHECK(gs.energy <= previous + 1e-10);
      previous = gs.energy;
    }
  }
  SUBCASE("limits and non-convergence") {
    BlockParams bp;
    bp.cutoffs = {4};
    const auto op = build_block_hamiltonian(toy_grid(), toy_modes(), bp);
    CHECK_THROWS_AS(ground_state(op), ValidationError);
    const auto small = build_block_hamiltonian(toy_grid(), first_modes(1), bp);
    GroundStateOptions o;
    o.max_matvecs = 5;
    o.krylov_size = 4;
    const GroundState gs = ground_state(small, o);
    CHECK_FALSE(gs.converged);
    CHECK(gs.residual > o.tolerance);
  }
}

TEST_CASE("mode sum interaction") {
  const Grid3D& g = toy_grid();
  const ModeSet modes = first_modes(7);
  const auto inter = mode_sum_interaction(g, modes);
  RealField3D rho(g);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& r : rho.values) r = u(gen);
  RVec w(g.size());
  inter->potential(rho.values, w);
  double lhs = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) lhs += rho.values[i] * w[i];
  lhs *= g.cell_volume();
  double rhs = 0.0;
  for (const Mode& m : modes.modes) {
    std::complex<double> hat{0.0, 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = g.node(i);
      hat += rho.values[i] *
             std::exp(std::complex<double>(0.0, dot3(m.representative, x)));
    }
    hat *= g.cell_volume();
    rhs += m.weight * m.weight * std::norm(hat) / (2.0 * kPi * kPi);
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("coherent minimization identity") {
  const Grid3D& g = toy_grid();
  SUBCASE("uniform density") {
    RealField3D rho(g);
    for (auto& r : rho.values) r = 1.0 / (g.size() * g.cell_volume());
    const auto rep = coherent_minimization_identity(rho, first_modes(2, 4), 1.0, 0.2, 8);
    CHECK(std::abs(rep.closed_form) < 1e-28);
    CHECK(std::abs(rep.lanczos_min) < 1e-12);
  }
  SUBCASE("point density") {
    RealField3D rho(g);
    rho.values[g.index(2, 5, 3)] = 1.0 / g.cell_volume();
    const ModeSet one = first_modes(1, 4);
    const double alpha = 1.5, delta = 0.3;
    const auto rep = coherent_minimization_identity(rho, one, alpha, delta, 30);
    const double M = one.modes[0].weight;
    const double expected = -alpha / (2.0 * kPi * kPi * (1.0 - delta)) * M * M;
    CHECK(std::abs(rep.amplitudes[0]) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(rep.closed_form == doctest::Approx(expected).epsilon(1e-13));
    CHECK(std::abs(rep.lanczos_min - expected) < 1e-10);
  }
  SUBCASE("random density, two modes") {
    for (unsigned seed : {1u, 2u, 3u}) {
      const RealField3D rho = random_electron_states(g, 1, seed)[0].density();
      const auto rep = coherent_minimization_identity(rho, first_modes(2, 1), 1.0, 0.25, 16);
      CHECK(16 >= 10.0 * rep.max_shift_sq);
      CHECK(rep.deviation < 1e-6);
    }
  }
  SUBCASE("errors") {
    RealField3D rho(g);
    CHECK_THROWS_AS(coherent_minimization_identity(rho, first_modes(1), 1.0, 0.0, 4),
                    ValidationError);
    rho.values[0] = -1.0;
    CHECK_THROWS_AS(coherent_minimization_identity(rho, first_modes(1), 1.0, 0.0, 4),
                    ValidationError);
  }
}

TEST_CASE("coherent state resolution") {
  // Single-plane diagonals in closed form: P(m + 1, R^2) for the identity and
  // (m + 1) P(m + 2, R^2) - P(m + 1, R^2) for the number operator.
  const double R = 6.0;
  const int cutoff = 20;
  double id_dev = 0.0, num_dev = 0.0;
  for (int m = 0; m <= cutoff / 2; ++m) {
    const double p1 = boost::math::gamma_p(m + 1.0, R * R);
    const double p2 = boost::math::gamma_p(m + 2.0, R * R);
    id_dev = std::max(id_dev, std::abs(p1 - 1.0));
    num_dev = std::max(num_dev, std::abs((m + 1.0) * p2 - p1 - m));
  }
  const ResolutionReport one = resolution_checks(1, cutoff, {R, 96, 0});
  CHECK(one.identity_diagonal == doctest::Approx(id_dev).epsilon(1e-6));
  CHECK(one.number_diagonal == doctest::Approx(num_dev).epsilon(1e-6));
  CHECK(one.vacuum < 1e-12);

  for (int modes : {1, 2, 3}) {
    const ResolutionReport r = resolution_checks(modes, cutoff, {R, 96, 0});
    CHECK(r.vacuum < 1e-6);
    CHECK(r.identity_diagonal < 1e-4);
    CHECK(r.number_diagonal < 1e-4);
    CHECK(r.identity_off_diagonal < 1e-6);
    CHECK(r.number_off_diagonal < 1e-6);
  }
  // Larger radius tightens the diagonals.
  const ResolutionReport narrow = resolution_checks(2, cutoff, {4.5, 96, 0});
  const ResolutionReport wide = resolution_checks(2, cutoff, {6.0, 96, 0});
  CHECK(wide.identity_diagonal < narrow.identity_diagonal);
  CHECK(wide.number_diagonal < narrow.number_diagonal);
  CHECK_THROWS_AS(resolution_checks(0, cutoff), ValidationError);
  CHECK_THROWS_AS(resolution_checks(1, 4, {0.0, 96, 0}), ValidationError);
}

TEST_CASE("completion of squares on one cell") {
  CsquaresParams p;
  p.P = 0.8;
  p.cell = {1, 1, 0};
  p.submodes = 3;
  p.delta = 0.3;
  p.alpha = 2.0;
  p.L = 3.0;
  p.cutoff = 6;
  p.states = 100;
  const CsquaresReport r = csquares_check(p);
  CHECK(r.samples == 100);
  CHECK(r.min_expectation >= -1e-10);
  CHECK(r.ground_minimum >= -1e-10);
  CHECK(r.vacuum_expectation == doctest::Approx(r.penalty).epsilon(1e-12));

  // Large phase differences still respect the inequality.
  p.L = 12.0;
  p.submodes = 4;
  CHECK(csquares_check(p).ground_minimum >= -1e-10);

  p.alpha = 0.0;
  const CsquaresReport free = csquares_check(p);
  CHECK(free.penalty == 0.0);
  CHECK(free.min_expectation >= 0.0);
  CHECK(free.ground_minimum == doctest::Approx(0.0));

  p.submodes = 1;
  CHECK_THROWS_AS(csquares_check(p), ValidationError);
  p.submodes = 3;
  p.cell = {0, 0, 0};
  CHECK_THROWS_AS(csquares_check(p), ValidationError);  // middle slab at k = 0
}

TEST_CASE("pekar ordering on the toy") {
  BlockParams bp;
  bp.alpha = 1.0;
  bp.beta = 1.0;
  bp.delta = 0.25;
  GroundStateOptions go;
  go.tolerance = 1e-7;
  go.max_nonzeros = 1e9;
  double previous = 1e300;
  for (int cutoff : {1, 2}) {
    bp.cutoffs = {cutoff};
    const OrderingReport r = pekar_ordering_check(toy_grid(), toy_modes(), bp, go);
    CHECK(r.ground.converged);
    CHECK(r.upper_holds);
    CHECK(r.lower_holds);
    CHECK(r.E_toy < r.E_product);
    CHECK(r.E_toy > r.lower);
    CHECK(r.E_product >= r.E_coherent - 1e-12);
    CHECK(r.E_coherent == doctest::Approx(bp.beta * r.E_pekar_discrete).epsilon(1e-9));
    CHECK(r.E_toy <= previous);
    previous = r.E_toy;
  }

  SUBCASE("zero coupling") {
    bp.alpha = 0.0;
    bp.cutoffs = {1};
    bp.pair = {ZeroVectorPotential{}, GaussianWell{-2.0, 1.2, {}}};
    const OrderingReport r = pekar_ordering_check(toy_grid(), first_modes(3), bp, go);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        oracle::electron_matrix(toy_grid(), bp.beta, bp.pair), Eigen::EigenvaluesOnly);
    const double e0 = es.eigenvalues()[0];
    CHECK(r.E_toy == doctest::Approx(e0).epsilon(1e-9));
    CHECK(r.E_product == doctest::Approx(e0).epsilon(1e-6));
    CHECK(r.lower == doctest::Approx(e0 - 3.0).epsilon(1e-6));
  }
}

TEST_CASE("localization average") {
  const Grid3D& g = toy_grid();
  const PotentialPair coulomb{ZeroVectorPotential{}, CoulombPotential{1.0, {0.1, 0.0, -0.2}}};
  const auto states = random_electron_states(g, 3, 11);

  const LocalizationReport r = localization_average_check(g, 4.0, coulomb, 1.0, states);
  CHECK(r.partition == doctest::Approx(r.continuum_partition).epsilon(1e-12));
  CHECK(r.max_deviation < 1e-6);
  CHECK(r.delta_E == doctest::Approx(3.0 * kPi * kPi / 16.0));

  SUBCASE("magnetic field and beta") {
    const PotentialPair field{ConstantMagneticField{{0.0, 0.0, 0.6}}, CoulombPotential{}};
    const LocalizationReport m = localization_average_check(g, 6.0, field, 0.7, states);
    CHECK(m.max_deviation < 1e-6);
  }
  SUBCASE("constant state approaches the continuum sum") {
    ComplexField3D c8(g);
    for (auto& z : c8.values) z = 1.0;
    const Grid3D fine(16, 8.0, Boundary::kPeriodic);
    ComplexField3D c16(fine);
    for (auto& z : c16.values) z = 1.0;
    const auto coarse = localization_average_check(g, 4.0, {}, 1.0, {c8});
    const auto refined = localization_average_check(fine, 4.0, {}, 1.0, {c16});
    CHECK(coarse.max_deviation < 1e-6);
    CHECK(refined.max_deviation < 1e-6);
    CHECK(refined.max_continuum_residual < coarse.max_continuum_residual);
  }
  SUBCASE("delta E scales as L^-2") {
    const auto half = localization_average_check(g, 2.0, {}, 1.0, {states[0]});
    CHECK(half.delta_E == doctest::Approx(4.0 * r.delta_E));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(localization_average_check(g, 3.5, {}, 1.0, states), ValidationError);
    CHECK_THROWS_AS(localization_average_check(g, 10.0, {}, 1.0, states), ValidationError);
    CHECK_THROWS_AS(localization_average_check(Grid3D(8, 8.0, Boundary::kFreeSpace), 4.0, {},
                                               1.0, states),
                    ValidationError);
  }
}
