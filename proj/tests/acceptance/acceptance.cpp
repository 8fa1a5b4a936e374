// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance            all criteria in order
//   acceptance 3 11       selected criteria
//
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "oracles/radial_choquard.hpp"
#include "polaron/bipolaron.hpp"
#include "polaron/budget.hpp"
#include "polaron/fock.hpp"
#include "polaron/pekar.hpp"
#include "unit/helpers.hpp"

using namespace polaron;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Second-order Richardson extrapolation for h -> h / 2.
double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

const PotentialPair kFieldCoulomb{ConstantMagneticField{{0.0, 0.0, 1.0}},
                                  CoulombPotential{1.0, {}}};

pekar::PekarSolution solve_refined(const PotentialPair& pair, double alpha,
                                   const Grid3D& fine,
                                   const pekar::PekarSolution& coarse) {
  pekar::MinimizeOptions o;
  o.initializer = pekar::Initializer::kProvided;
  o.start = coarse.phi;
  return pekar::minimize_pekar({pair, alpha, fine, nullptr}, o);
}

Result free_pekar_constant() {
  const double reference = oracle::free_pekar_constant();
  auto refine = [&](double extent) {
    const Grid3D g64(64, extent, Boundary::kFreeSpace);
    const Grid3D g128(128, extent, Boundary::kFreeSpace);
    const auto c = pekar::minimize_pekar({PotentialPair{}, 1.0, g64, nullptr});
    const auto f = solve_refined(PotentialPair{}, 1.0, g128, c);
    return std::array<double, 4>{c.energy, f.energy, richardson(c.energy, f.energy),
                                 double(c.converged && f.converged)};
  };
  const double extent = pekar::default_extent(PotentialPair{}, 1.0);
  const auto main = refine(extent);
  const auto box24 = refine(24.0);
  const double dev = rel(main[2], reference);
  return {dev < 1e-3 && main[3] == 1.0,
          fmt("oracle %.10f, extent %.2f: 64^3 %.8f 128^3 %.8f extrapolated %.8f "
              "(rel %.1e); extent 24: extrapolated %.8f (rel %.1e)",
              reference, extent, main[0], main[1], main[2], dev, box24[2],
              rel(box24[2], reference))};
}

Result gaussian_closed_form() {
  const auto opt = pekar::gaussian_family_minimum(PotentialPair{}, 1.0);
  const double exact = -1.0 / (3.0 * kPi);
  const double dev = rel(opt.energy, exact);
  return {dev < 1e-6, fmt("min %.12f vs -1/(3 pi) %.12f (rel %.1e)", opt.energy, exact, dev)};
}

Result scaling_identity() {
  const Grid3D g(24, 12.0, Boundary::kFreeSpace);
  bool pass = true;
  std::string detail;
  for (double s : {2.0, 3.0, 5.0}) {
    const auto rep = pekar::scaling_check({kFieldCoulomb, 1.0, g, nullptr}, s);
    pass = pass && rep.deviation < 1e-10 && rep.base.converged && rep.scaled.converged;
    detail += fmt("alpha %g: %.1e  ", s, rep.deviation);
  }
  return {pass, detail + "(B = (0,0,1), coulomb(1), 24^3)"};
}

Result weight_sum_identity() {
  std::mt19937_64 gen(0);
  std::uniform_real_distribution<double> lam(0.5, 6.0), ratio(0.4, 4.0);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double Lambda = lam(gen);
    const double P = Lambda / ratio(gen);
    const auto part = budget::block_partition(Lambda, P);
    worst = std::max(worst, rel(part.weight_sum, 4.0 * kPi * Lambda));
  }
  const double count = budget::block_count(1.0, 1.0);
  const auto unit = budget::block_partition(1.0, 1.0);
  return {worst < 1e-6 && count == 27.0 && unit.cells.size() == 27,
          fmt("max rel deviation %.1e over 10 random (Lambda, P); |Lambda_P| = %g at "
              "Lambda = P",
              worst, count)};
}

Result error_exponent() {
  const std::vector<double> alphas{1e2, 1e3, 1e4, 1e5, 1e6};
  const auto rows =
      budget::sandwich_report(alphas, budget::free_pekar_oracle(oracle::free_pekar_constant()));
  std::vector<double> gaps;
  bool ordered = true;
  for (const auto& r : rows) {
    gaps.push_back(r.gap);
    ordered = ordered && r.upper >= r.lower;
  }
  const double slope = budget::fitted_exponent(alphas, gaps);
  return {ordered && slope >= 1.75 && slope <= 1.85,
          fmt("fitted exponent %.4f, upper >= lower at all alpha: %s", slope,
              ordered ? "yes" : "no")};
}

Result concavity() {
  const std::vector<double> lambdas{0.6, 0.8, 1.0, 1.2, 1.4};
  bool pass = true;
  std::string detail;
  for (bool field : {false, true}) {
    PotentialPair pair{ZeroVectorPotential{}, CoulombPotential{1.0, {}}};
    if (field) pair.vector_potential = ConstantMagneticField{{0.0, 0.0, 1.0}};
    const Grid3D g(48, pekar::default_extent(
                           {pair.vector_potential, scaled_by(pair.scalar_potential, 0.6)},
                           0.36),
                   Boundary::kFreeSpace);
    const auto rep = pekar::concavity_scan(pair, lambdas, g);
    double worst = -1e300;
    for (double d : rep.second_differences) worst = std::max(worst, d);
    bool conv = true;
    for (const auto& p : rep.points) conv = conv && p.converged;
    pass = pass && rep.concave && conv;
    detail += fmt("%s: max second difference %.3e, 2 eps %.1e  ", field ? "B = (0,0,1)" : "B = 0",
                  worst, 2.0 * rep.solver_epsilon);
  }
  return {pass, detail + "(coulomb(1), 48^3)"};
}

Result diamagnetic() {
  const ScalarPotentialSpec v = CoulombPotential{1.0, {}};
  const Grid3D g(48, pekar::default_extent({ZeroVectorPotential{}, v}, 1.0),
                 Boundary::kFreeSpace);
  const auto rep = pekar::diamagnetic_check(v, {0.0, 0.5, 1.0, 2.0, 5.0}, 1.0, g);
  double worst = 1e300;
  bool conv = true;
  for (const auto& p : rep.points) {
    if (p.field != 0.0) worst = std::min(worst, p.margin);
    conv = conv && p.converged;
  }
  return {rep.ordered && conv && worst >= -rep.solver_epsilon,
          fmt("min margin E(B) - E(0) %.4e over B in {0.5, 1, 2, 5}, eps %.1e "
              "(coulomb(1), alpha 1, 48^3)",
              worst, rep.solver_epsilon)};
}

Result bipolaron_algebra() {
  double worst = 0.0;
  for (Boundary b : {Boundary::kFreeSpace, Boundary::kPeriodic}) {
    const Grid3D g(16, 10.0, b);
    const ComplexField3D f = testing_helpers::smooth_random(g, 5);
    for (double u : {0.0, 0.7, 3.2, 9.0}) {
      const bipolaron::BipolaronProblem p{kFieldCoulomb, u, 0.8, g};
      const double e = bipolaron::pt_energy(bipolaron::product_ansatz(f), p).total;
      const double reduced = bipolaron::product_energy(f, p);
      worst = std::max(worst, std::abs(e - reduced) / std::max(1.0, std::abs(reduced)));
    }
  }
  const double extent = pekar::default_extent(PotentialPair{}, 2.0);
  const Grid3D g64(64, extent, Boundary::kFreeSpace), g128(128, extent, Boundary::kFreeSpace);
  const auto c = bipolaron::minimize_pt({PotentialPair{}, 0.0, 1.0, g64}, 1);
  bipolaron::PtOptions o;
  o.start = c.ansatz;
  const auto f = bipolaron::minimize_pt({PotentialPair{}, 0.0, 1.0, g128}, 1, o);
  const double target = 8.0 * oracle::free_pekar_constant();
  const double extrapolated = richardson(c.energy, f.energy);
  const double dev = rel(extrapolated, target);
  return {worst < 1e-10 && dev < 1e-3 && c.converged && f.converged,
          fmt("rank-1 reduction %.1e; u = 0: 64^3 %.8f 128^3 %.8f extrapolated %.8f vs "
              "8 e_P %.8f (rel %.1e)",
              worst, c.energy, f.energy, extrapolated, target, dev)};
}

Result binding_threshold() {
  bipolaron::BindingOptions o;  // rank 2, 48^3 / 64^3, automatic box
  const auto scan = bipolaron::threshold_scan(PotentialPair{}, 2.0, 4.5, 0.05, o);
  const auto& at2 = scan.curve.front();
  bool conv = true;
  for (const auto& r : scan.curve) conv = conv && r.converged;
  return {at2.u == 2.0 && at2.gap > 0.0 && at2.certified && scan.lower > 2.0 && conv,
          fmt("u = 2: gap %.5f, error bar %.1e (2 err_EP %.1e + err_EPT %.1e); bracket "
              "[%.4f, %.4f]",
              at2.gap, at2.error_bar, 2.0 * at2.pekar.error, at2.pt.error, scan.lower,
              scan.upper)};
}

Result pt_scaling() {
  const Grid3D g(20, 14.0, Boundary::kFreeSpace);
  double worst = 0.0;
  for (const auto& [pair, s, rank] :
       std::vector<std::tuple<PotentialPair, double, int>>{
           {PotentialPair{}, 2.0, 1}, {kFieldCoulomb, 2.0, 1}, {kFieldCoulomb, 3.0, 2}})
    worst = std::max(worst,
                     bipolaron::pt_scaling_check({pair, 1.0, 1.0, g}, s, rank).deviation);
  return {worst < 1e-10, fmt("max deviation %.1e (free and B = (0,0,1) + coulomb(1), "
                             "s in {2, 3}, ranks 1 and 2, 20^3)",
                             worst)};
}

Result fock_sandwich() {
  // Displaced oscillator nu b*b + c b + conj(c) b*: ground energy -|c|^2 / nu.
  const double nu = 0.75;
  const cplx c{0.6, -0.3};
  const auto osc = fock::TruncatedFockOperator::phonon_sector(nu, {c}, {60});
  fock::GroundStateOptions go;
  go.tolerance = 1e-10;
  const auto og = fock::ground_state(osc, go);
  const double osc_dev = std::abs(og.energy + std::norm(c) / nu);

  const Grid3D grid(8, 8.0, Boundary::kPeriodic);
  const auto modes = fock::select_modes(4.0, 2.0 * kPi / 8.0, 7);
  fock::BlockParams bp;
  bp.alpha = 1.0;
  bp.beta = 1.0;
  bp.delta = 0.25;
  bp.cutoffs = {4};
  fock::GroundStateOptions opts;
  opts.tolerance = 1e-6;
  opts.max_nonzeros = 2e9;
  const auto rep = fock::pekar_ordering_check(grid, modes, bp, opts);
  return {osc_dev < 1e-8 && rep.upper_holds && rep.lower_holds && rep.ground.converged,
          fmt("E_toy %.8f <= E_product %.8f, >= lower %.8f (beta E_P^disc %.8f - %zu); "
              "dimension %zu, residual %.1e; displaced oscillator error %.1e",
              rep.E_toy, rep.E_product, rep.lower, rep.E_pekar_discrete, modes.size(),
              rep.ground.state.size(), rep.ground.residual, osc_dev)};
}

Result coherent_identities() {
  const auto res = fock::resolution_checks(2, 20, {6.0, 96, 0});
  const bool res_ok = res.identity_diagonal <= 1e-4 && res.number_diagonal <= 1e-4 &&
                      res.identity_off_diagonal <= 1e-6 &&
                      res.number_off_diagonal <= 1e-6;
  const auto cs = fock::csquares_check(fock::CsquaresParams{});
  return {res_ok && cs.samples == 100 && cs.min_expectation >= -1e-10,
          fmt("resolution (2 modes, cutoff 20, radius 6): identity %.1e / %.1e, number "
              "%.1e / %.1e (diag / off); csquares min over %d states %.4e",
              res.identity_diagonal, res.identity_off_diagonal, res.number_diagonal,
              res.number_off_diagonal, cs.samples, cs.min_expectation)};
}

Result localization() {
  double worst_partition = 0.0;
  std::mt19937_64 gen(0);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (double L : {0.7, 1.5, 4.0}) {
    const budget::LocalizationProfile profile(L);
    const double exact = std::pow(L / 2.0, 3);
    for (int i = 0; i < 3; ++i) {
      const Vec3 x{u(gen), u(gen), u(gen)};
      worst_partition =
          std::max(worst_partition, rel(profile.partition_integral(x, 1 << 16), exact));
    }
  }
  const Grid3D g(16, 8.0, Boundary::kPeriodic);
  const PotentialPair pair{ZeroVectorPotential{}, GaussianWell{-1.0, 1.0, {}}};
  const auto states = fock::random_electron_states(g, 5, 0);
  const auto rep = fock::localization_average_check(g, 4.0, pair, 1.0, states);
  return {worst_partition < 1e-3 && rep.max_deviation < 1e-6,
          fmt("partition integral max rel deviation %.1e; discrete IMS deviation %.1e "
              "(continuum residual %.1e, reported)",
              worst_partition, rep.max_deviation, rep.max_continuum_residual)};
}

Result weak_field() {
  const PotentialPair pair{ConstantMagneticField{{0.0, 0.0, 1.0}}, ZeroScalarPotential{}};
  const Grid3D g(64, pekar::default_extent(PotentialPair{}, 1.0), Boundary::kFreeSpace);
  const auto rep = pekar::weak_field_scan(pair, {2.0, 4.0, 8.0, 16.0}, nullptr, g);
  std::string detail;
  bool conv = true;
  for (const auto& p : rep.points) {
    detail += fmt("alpha %g: %.3e  ", p.alpha, p.deviation);
    conv = conv && p.converged;
  }
  const double last = std::abs(rep.points.back().deviation);
  return {rep.monotone && last < 1e-2 && conv, detail + "(B = (0,0,1), 64^3)"};
}

struct Criterion {
  const char* name;
  std::function<Result()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c{
      {"free Pekar constant", free_pekar_constant},
      {"Gaussian closed form", gaussian_closed_form},
      {"scaling identity", scaling_identity},
      {"weight-sum identity", weight_sum_identity},
      {"error-exponent law", error_exponent},
      {"concavity", concavity},
      {"diamagnetic ordering", diamagnetic},
      {"bipolaron algebra", bipolaron_algebra},
      {"binding threshold", binding_threshold},
      {"PT scaling", pt_scaling},
      {"Fock toy sandwich", fock_sandwich},
      {"coherent identities", coherent_identities},
      {"localization identities", localization},
      {"weak-field convergence", weak_field},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > static_cast<int>(criteria().size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 2;
    }
    selected.push_back(n);
  }
  if (selected.empty())
    for (int n = 1; n <= static_cast<int>(criteria().size()); ++n) selected.push_back(n);

  int failures = 0;
  for (int n : selected) {
    const auto& c = criteria()[n - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %-24s %s  %s  [%.1f s]\n", n, c.name, r.pass ? "PASS" : "FAIL",
                r.detail.c_str(), secs);
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
