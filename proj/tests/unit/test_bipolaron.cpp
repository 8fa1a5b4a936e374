#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracles/radial_choquard.hpp"
#include "oracles/two_body.hpp"
#include "polaron/bipolaron.hpp"

using namespace polaron;
using namespace polaron::bipolaron;
using testing_helpers::smooth_random;

namespace {

SeparableAnsatz random_ansatz(const Grid3D& g, int rank, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  SeparableAnsatz a;
  for (int k = 0; k < rank; ++k) {
    a.factors.push_back(smooth_random(g, seed * 31 + k, 0.25 + 0.1 * k));
    a.coefficients.push_back(d(gen));
  }
  a.normalize();
  return a;
}

const PotentialPair& field_pair() {
  static const PotentialPair p{ConstantMagneticField{{0.3, 0.0, 0.8}},
                               GaussianWell{-0.9, 1.2, {0.4, -0.2, 0.1}}};
  return p;
}

}  // namespace

TEST_CASE("pt energy against direct six-dimensional quadrature") {
  for (Boundary b : {Boundary::kFreeSpace, Boundary::kPeriodic}) {
    const Grid3D g = make_grid(8, 7.0, b);
    for (int rank : {1, 2, 3}) {
      const SeparableAnsatz a = random_ansatz(g, rank, 10 + rank);
      const BipolaronProblem p{field_pair(), 1.3, 0.8, g};
      const auto terms = oracle::two_body_direct(a, p);
      CHECK(terms.asymmetry < 1e-15);
      CHECK(terms.norm == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(a.norm_sq() == doctest::Approx(terms.norm).epsilon(1e-12));
      CHECK(terms.one_body_x == doctest::Approx(terms.one_body_y).epsilon(1e-12));

      const PtBreakdown e = pt_energy(a, p);
      CHECK(e.one_body ==
            doctest::Approx(terms.one_body_x + terms.one_body_y).epsilon(1e-10));
      CHECK(e.repulsion == doctest::Approx(1.3 * terms.repulsion).epsilon(1e-10));
      CHECK(e.attraction == doctest::Approx(terms.attraction).epsilon(1e-10));
      CHECK(e.total ==
            doctest::Approx(oracle::two_body_energy(terms, 1.3, 0.8)).epsilon(1e-10));
    }
  }
}

TEST_CASE("rank-1 states reduce to the one-body functional") {
  for (Boundary b : {Boundary::kFreeSpace, Boundary::kPeriodic}) {
    const Grid3D g = make_grid(16, 10.0, b);
    const ComplexField3D f = smooth_random(g, 5);
    for (double U : {0.0, 0.7, 3.2, 9.0}) {
      const BipolaronProblem p{field_pair(), U, 0.8, g};
      const double e = pt_energy(product_ansatz(f), p).total;
      const double reduced = product_energy(f, p);
      CHECK(std::abs(e - reduced) <= 1e-10 * std::max(1.0, std::abs(reduced)));
    }
    // U = 4 alpha: the Coulomb terms cancel.
    const BipolaronProblem p{field_pair(), 3.2, 0.8, g};
    const PtBreakdown e = pt_energy(product_ansatz(f), p);
    CHECK(e.total == doctest::Approx(e.one_body).epsilon(1e-10));
  }
}

TEST_CASE("pt energy properties") {
  const Grid3D g = make_grid(16, 10.0, Boundary::kFreeSpace);
  const BipolaronProblem p{field_pair(), 1.1, 1.0, g};
  const SeparableAnsatz a = random_ansatz(g, 3, 77);

  SUBCASE("relabeling factors") {
    SeparableAnsatz b = a;
    std::swap(b.factors[0], b.factors[2]);
    std::swap(b.coefficients[0], b.coefficients[2]);
    CHECK(pt_energy(b, p).total == doctest::Approx(pt_energy(a, p).total).epsilon(1e-13));
  }
  SUBCASE("overall scale does not matter") {
    SeparableAnsatz b = a;
    for (auto& c : b.coefficients) c *= 3.0;
    for (auto& v : b.factors[1].values) v *= cplx(0.0, 2.0);
    b.coefficients[1] *= -0.25;  // (2i)^2 = -4
    CHECK(pt_energy(b, p).total == doctest::Approx(pt_energy(a, p).total).epsilon(1e-12));
  }
  SUBCASE("normalization") {
    SeparableAnsatz b = a;
    b.coefficients[0] *= 5.0;
    b.normalize();
    CHECK(b.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("gradient matches central differences") {
    const PtEvaluator ev(p);
    std::vector<ComplexField3D> grad;
    ev.gradient(a, grad);
    std::mt19937_64 gen(9);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<ComplexField3D> dir;
      double slope = 0.0;
      for (int k = 0; k < a.rank(); ++k) {
        ComplexField3D v(g);
        for (std::size_t i = 0; i < g.size(); ++i)
          v.values[i] = cplx(d(gen), d(gen)) * std::abs(a.factors[k].values[i]);
        slope += inner(grad[k], v).real();
        dir.push_back(std::move(v));
      }
      auto at = [&](double t) {
        SeparableAnsatz b = a;
        for (int k = 0; k < a.rank(); ++k)
          for (std::size_t i = 0; i < g.size(); ++i)
            b.factors[k].values[i] += t * dir[k].values[i];
        return ev.energy(b).total;
      };
      const double t = 1e-4;
      const double fd = (at(t) - at(-t)) / (2.0 * t);
      CHECK(slope == doctest::Approx(fd).epsilon(1e-5));
    }
  }
  SUBCASE("errors") {
    const SeparableAnsatz big = random_ansatz(g, 5, 3);
    CHECK_THROWS_AS(pt_energy(big, p), ValidationError);
    CHECK_NOTHROW(pt_energy(big, p, 5));
    CHECK_THROWS_AS(pt_energy(a, p, 2), ValidationError);
    SeparableAnsatz other = a;
    other.factors[1] = smooth_random(make_grid(16, 11.0, Boundary::kFreeSpace), 1);
    CHECK_THROWS_AS(pt_energy(other, p), ValidationError);
    CHECK_THROWS_AS(pt_energy(a, {PotentialPair{}, -1.0, 1.0, g}), ValidationError);
    CHECK_THROWS_AS(pt_energy(a, {PotentialPair{}, 1.0, 0.0, g}), ValidationError);
  }
}

TEST_CASE("minimize pt") {
  const Grid3D g = make_grid(24, 16.0, Boundary::kFreeSpace);

  SUBCASE("rank 1 at U = 0 is two coupling-2 Pekar problems") {
    const PtSolution s = minimize_pt({PotentialPair{}, 0.0, 1.0, g}, 1);
    CHECK(s.converged);
    const auto pk = pekar::minimize_pekar({PotentialPair{}, 2.0, g, nullptr});
    CHECK(s.energy == doctest::Approx(2.0 * pk.energy).epsilon(1e-9));
    CHECK(s.energy <= 2.0 * pk.energy + 1e-12);
    // Coarse grid: only the leading digits of 8 e_P.
    CHECK(s.energy == doctest::Approx(8.0 * oracle::free_pekar_constant()).epsilon(3e-2));
  }
  SUBCASE("sweeps never raise the energy and rank 2 beats rank 1") {
    const BipolaronProblem p{PotentialPair{}, 1.0, 1.0, g};
    const PtSolution r1 = minimize_pt(p, 1);
    const PtSolution r2 = minimize_pt(p, 2);
    CHECK(r2.converged);
    CHECK(r2.energy <= r1.energy + 1e-12);
    for (std::size_t i = 1; i < r2.sweep_energies.size(); ++i)
      CHECK(r2.sweep_energies[i] <= r2.sweep_energies[i - 1] + 1e-13);
    CHECK(r2.ansatz.norm_sq() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(pt_energy(r2.ansatz, p).total == doctest::Approx(r2.energy).epsilon(1e-10));
  }
  SUBCASE("strong repulsion does not bind") {
    const auto pk = pekar::minimize_pekar({PotentialPair{}, 1.0, g, nullptr});
    const PtSolution s = minimize_pt({PotentialPair{}, 100.0, 1.0, g}, 2);
    CHECK(s.energy >= 2.0 * pk.energy);
  }
  SUBCASE("deterministic and warm-startable") {
    const BipolaronProblem p{field_pair(), 1.5, 1.0, g};
    const PtSolution a = minimize_pt(p, 2);
    const PtSolution b = minimize_pt(p, 2);
    CHECK(a.energy == b.energy);
    PtOptions o;
    o.start = a.ansatz;
    const PtSolution c = minimize_pt(p, 3, o);
    CHECK(c.energy <= a.energy + 1e-12);
  }
  SUBCASE("errors") {
    const BipolaronProblem p{PotentialPair{}, 1.0, 1.0, g};
    CHECK_THROWS_AS(minimize_pt(p, 0), ValidationError);
    CHECK_THROWS_AS(minimize_pt(p, 5), ValidationError);
    PtOptions o;
    o.tolerance = 0.0;
    CHECK_THROWS_AS(minimize_pt(p, 1, o), ValidationError);
    PtOptions few;
    few.max_iterations = 1;
    few.tolerance = 1e-14;
    CHECK_FALSE(minimize_pt({field_pair(), 1.0, 1.0, g}, 2, few).converged);
  }
}

TEST_CASE("pt scaling identity on matched grids") {
  const Grid3D g = make_grid(20, 14.0, Boundary::kFreeSpace);
  const BipolaronProblem free_p{PotentialPair{}, 1.0, 1.0, g};
  const auto same = pt_scaling_check(free_p, 1.0, 1);
  CHECK(same.lhs == same.rhs);
  CHECK(same.deviation == 0.0);
  CHECK(pt_scaling_check(free_p, 2.0, 1).deviation < 1e-10);
  const BipolaronProblem field_p{{ConstantMagneticField{{0.0, 0.0, 1.0}}, CoulombPotential{}},
                                 1.0, 1.0, g};
  CHECK(pt_scaling_check(field_p, 2.0, 1).deviation < 1e-10);
  CHECK(pt_scaling_check(field_p, 3.0, 2).deviation < 1e-10);
  CHECK_THROWS_AS(pt_scaling_check(free_p, 0.0, 1), ValidationError);
}

TEST_CASE("binding gap and threshold scan") {
  BindingOptions o;
  o.coarse_points = 20;
  o.fine_points = 24;
  o.extent = 24.0;
  const double ep = oracle::free_pekar_constant();

  SUBCASE("no repulsion binds strongly") {
    const BindingReport r = binding_gap(PotentialPair{}, 0.0, o);
    CHECK(r.gap == r.twice_EP - r.EPT_upper);
    CHECK(r.gap == doctest::Approx(-6.0 * ep).epsilon(5e-2));
    CHECK(r.certified);
    CHECK(r.error_bar == doctest::Approx(2.0 * r.pekar.error + r.pt.error));
  }
  SUBCASE("strong repulsion does not") {
    const BindingReport r = binding_gap(PotentialPair{}, 100.0, o);
    CHECK(r.gap < 0.0);
    CHECK_FALSE(r.certified);
  }
  SUBCASE("threshold above 2 with a non-increasing gap") {
    const ThresholdScan scan = threshold_scan(PotentialPair{}, 0.0, 4.5, 0.05, o);
    CHECK(scan.lower > 2.0);
    CHECK(scan.upper - scan.lower <= 0.05);
    CHECK(scan.upper < 4.5);
    for (std::size_t i = 1; i < scan.curve.size(); ++i) {
      CHECK(scan.curve[i].u > scan.curve[i - 1].u);
      CHECK(scan.curve[i].gap <= scan.curve[i - 1].gap + 1e-9);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(binding_gap(PotentialPair{}, -1.0, o), ValidationError);
    CHECK_THROWS_AS(threshold_scan(PotentialPair{}, 3.0, 2.0, 0.1, o), ValidationError);
    CHECK_THROWS_AS(threshold_scan(PotentialPair{}, 0.0, 5.0, 0.0, o), ValidationError);
    BindingOptions bad = o;
    bad.coarse_points = 24;
    CHECK_THROWS_AS(binding_gap(PotentialPair{}, 1.0, bad), ValidationError);
  }
}
