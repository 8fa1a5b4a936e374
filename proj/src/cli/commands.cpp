#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>

#include <json.hpp>

#include "polaron/bipolaron.hpp"
#include "polaron/budget.hpp"
#include "polaron/cli.hpp"
#include "polaron/fock.hpp"

namespace polaron::cli {
namespace {

using nlohmann::json;

struct Env {
  const RunOptions& opts;
  PekarCache& cache;
};

struct Outcome {
  Table table;
  json outputs = json::object();
  json provenance = json::object();
  bool converged = true;
  std::vector<std::string> warnings;
};

double nonnegative(double v, const std::string& key) {
  if (!(v >= 0.0)) throw ValidationError(key + ": must be >= 0");
  return v;
}

double positive(double v, const std::string& key) {
  if (!(v > 0.0)) throw ValidationError(key + ": must be > 0");
  return v;
}

PotentialPair read_fields(const Config& c) {
  PotentialPair p;
  if (c.word("fields.vector", "zero", {"zero", "constant-field"}) == "constant-field")
    p.vector_potential = ConstantMagneticField{c.vec3("fields.field", {0.0, 0.0, 1.0})};
  const std::string scalar =
      c.word("fields.scalar", "zero", {"zero", "coulomb", "gaussian-well"});
  if (scalar == "coulomb") {
    p.scalar_potential = CoulombPotential{c.real("fields.charge", 1.0),
                                          c.vec3("fields.center", {})};
  } else if (scalar == "gaussian-well") {
    p.scalar_potential =
        GaussianWell{c.real("fields.depth", -1.0),
                     positive(c.real("fields.width", 1.0), "fields.width"),
                     c.vec3("fields.center", {})};
  }
  return p;
}

Boundary read_boundary(const Config& c, const std::string& key,
                       const std::string& fallback) {
  return c.word(key, fallback, {"free-space", "periodic"}) == "periodic"
             ? Boundary::kPeriodic
             : Boundary::kFreeSpace;
}

struct GridSpec {
  int points = 64;
  double extent = 0.0;  // 0: automatic
  Boundary boundary = Boundary::kFreeSpace;

  Grid3D make(const std::function<double()>& automatic) const {
    return Grid3D(points, extent > 0.0 ? extent : automatic(), boundary);
  }
};

GridSpec read_grid(const Config& c, int points = 64, double extent = 0.0,
                   const std::string& boundary = "free-space") {
  GridSpec g;
  g.points = c.integer("grid.points", points);
  g.extent = nonnegative(c.real("grid.extent", extent), "grid.extent");
  g.boundary = read_boundary(c, "grid.boundary", boundary);
  return g;
}

pekar::MinimizeOptions read_solver(const Config& c, std::uint64_t seed) {
  pekar::MinimizeOptions o;
  o.tolerance = positive(c.real("solver.tolerance", o.tolerance), "solver.tolerance");
  o.max_iterations = c.integer("solver.max_iterations", o.max_iterations);
  o.restarts = c.integer("solver.restarts", o.restarts);
  if (o.max_iterations < 1) throw ValidationError("solver.max_iterations: must be >= 1");
  if (o.restarts < 0) throw ValidationError("solver.restarts: must be >= 0");
  o.seed = seed;
  return o;
}

json grid_json(const Grid3D& g) {
  return {{"points", g.points()},
          {"extent", g.extent()},
          {"boundary", to_string(g.boundary())}};
}

json solution_json(const pekar::PekarSolution& s, bool hit) {
  return {{"iterations", hit ? 0 : s.iterations},
          {"solver_iterations", s.iterations},
          {"residual", s.projected_residual},
          {"error_estimate", s.energy_error_estimate},
          {"converged", s.converged},
          {"cache_hit", hit}};
}

// Pekar oracle E_P(A, f V, c) for the budget commands.
struct OracleSpec {
  budget::PekarOracle oracle;
  json description;
};

OracleSpec read_oracle(const Config& c, const std::string& section,
                       const PotentialPair& pair, Env& env, Outcome& out) {
  const std::string kind =
      c.word(section + ".oracle", "closed-form", {"closed-form", "numeric"});
  if (kind == "closed-form") {
    const double e_p = c.real(section + ".e_p", -0.10851280523);
    if (!(e_p < 0.0)) throw ValidationError(section + ".e_p: must be negative");
    if (!is_zero(pair.vector_potential) || !is_zero(pair.scalar_potential))
      throw ValidationError(section +
                            ".oracle: closed-form requires zero fields; use numeric");
    return {budget::free_pekar_oracle(e_p), {{"kind", kind}, {"e_p", e_p}}};
  }
  const GridSpec grid = read_grid(c);
  const auto solver = read_solver(c, env.opts.seed);
  out.provenance["oracle_solves"] = json::array();
  budget::PekarOracle oracle = [pair, grid, solver, &env, &out](double f,
                                                                double coupling) {
    const PotentialPair fp{pair.vector_potential, scaled_by(pair.scalar_potential, f)};
    const Grid3D g = grid.make([&] { return pekar::default_extent(fp, coupling); });
    const auto r = env.cache.get_or_solve({fp, coupling, g, nullptr}, solver);
    out.converged = out.converged && r.solution.converged;
    json entry = solution_json(r.solution, r.hit);
    entry["potential_factor"] = f;
    entry["coupling"] = coupling;
    entry["grid"] = grid_json(g);
    out.provenance["oracle_solves"].push_back(std::move(entry));
    return r.solution.energy;
  };
  return {oracle, {{"kind", kind}}};
}

Outcome pekar_solve(const Config& c, Env& env) {
  const PotentialPair pair = read_fields(c);
  const double alpha = nonnegative(c.real("pekar-solve.alpha", 1.0), "pekar-solve.alpha");
  const GridSpec gs = read_grid(c);
  const auto solver = read_solver(c, env.opts.seed);
  c.reject_unused();
  const Grid3D grid = gs.make([&] { return pekar::default_extent(pair, alpha); });
  const auto r = env.cache.get_or_solve({pair, alpha, grid, nullptr}, solver);
  const auto& s = r.solution;

  Outcome out;
  out.table = {"pekar-solve",
               {"alpha", "energy", "kinetic", "potential", "coulomb", "residual",
                "error_estimate", "converged"},
               {{alpha, s.energy, s.kinetic, s.potential, s.coulomb,
                 s.projected_residual, s.energy_error_estimate, double(s.converged)}}};
  out.outputs = {{"energy", s.energy}, {"residual", s.projected_residual}};
  out.provenance = solution_json(s, r.hit);
  out.provenance["grid"] = grid_json(grid);
  out.converged = s.converged;
  return out;
}

Outcome pekar_scan(const Config& c, Env& env) {
  const PotentialPair pair = read_fields(c);
  const auto alphas = c.reals("pekar-scan.alphas", {1.0, 2.0, 4.0, 8.0});
  for (double a : alphas) nonnegative(a, "pekar-scan.alphas");
  const GridSpec gs = read_grid(c);
  const auto solver = read_solver(c, env.opts.seed);
  c.reject_unused();
  const double smallest = *std::min_element(alphas.begin(), alphas.end());
  const Grid3D grid = gs.make([&] { return pekar::default_extent(pair, smallest); });

  // Bounded fan-out: at most `threads` solves in flight.
  std::vector<PekarCache::Lookup> results;
  results.reserve(alphas.size());
  const std::size_t width = static_cast<std::size_t>(env.opts.threads);
  for (std::size_t begin = 0; begin < alphas.size(); begin += width) {
    std::vector<std::future<PekarCache::Lookup>> batch;
    for (std::size_t i = begin; i < std::min(alphas.size(), begin + width); ++i)
      batch.push_back(std::async(std::launch::async, [&, i] {
        return env.cache.get_or_solve({pair, alphas[i], grid, nullptr}, solver);
      }));
    for (auto& f : batch) results.push_back(f.get());
  }

  Outcome out;
  out.table = {"pekar-scan",
               {"alpha", "energy", "kinetic", "potential", "coulomb", "residual",
                "error_estimate", "converged"},
               {}};
  json points = json::array();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const auto& s = results[i].solution;
    out.table.rows.push_back({alphas[i], s.energy, s.kinetic, s.potential, s.coulomb,
                              s.projected_residual, s.energy_error_estimate,
                              double(s.converged)});
    points.push_back(solution_json(s, results[i].hit));
    out.converged = out.converged && s.converged;
  }
  out.outputs = {{"points", alphas.size()}};
  out.provenance = {{"grid", grid_json(grid)}, {"points", points}};
  return out;
}

Outcome scaling(const Config& c, Env& env) {
  const PotentialPair pair = read_fields(c);
  const double alpha = nonnegative(c.real("scaling.alpha", 1.0), "scaling.alpha");
  const double s = positive(c.real("scaling.s", 2.0), "scaling.s");
  const GridSpec gs = read_grid(c);
  const auto solver = read_solver(c, env.opts.seed);
  c.reject_unused();
  const Grid3D grid = gs.make([&] { return pekar::default_extent(pair, alpha); });
  const auto rep = pekar::scaling_check({pair, alpha, grid, nullptr}, s, solver);

  Outcome out;
  out.table = {"scaling", {"s", "lhs", "rhs", "deviation"},
               {{s, rep.lhs, rep.rhs, rep.deviation}}};
  out.outputs = {{"deviation", rep.deviation}};
  out.provenance = {{"grid", grid_json(grid)},
                    {"scaled", solution_json(rep.scaled, false)},
                    {"base", solution_json(rep.base, false)}};
  out.converged = rep.scaled.converged && rep.base.converged;
  return out;
}

Outcome concavity(const Config& c, Env& env) {
  const PotentialPair pair = read_fields(c);
  const auto lambdas = c.reals("concavity.lambdas", {0.5, 0.75, 1.0, 1.25, 1.5});
  const GridSpec gs = read_grid(c);
  const auto solver = read_solver(c, env.opts.seed);
  c.reject_unused();
  const double smallest = positive(*std::min_element(lambdas.begin(), lambdas.end()),
                                   "concavity.lambdas");
  const Grid3D grid = gs.make([&] {
    return pekar::default_extent(
        {pair.vector_potential, scaled_by(pair.scalar_potential, smallest)},
        smallest * smallest);
  });
  const auto rep = pekar::concavity_scan(pair, lambdas, grid, solver);

  Outcome out;
  out.table = {"concavity",
               {"lambda", "energy", "residual", "error_estimate", "converged"},
               {}};
  for (const auto& p : rep.points) {
    out.table.rows.push_back(
        {p.parameter, p.energy, p.residual, p.error_estimate, double(p.converged)});
    out.converged = out.converged && p.converged;
  }
  out.outputs = {{"concave", rep.concave},
                 {"solver_epsilon", rep.solver_epsilon},
                 {"second_differences", rep.second_differences}};
  out.provenance = {{"grid", grid_json(grid)}};
  return out;
}

Outcome diamagnetic(const Config& c, Env& env) {
  const PotentialPair pair = read_fields(c);
  if (!is_zero(pair.vector_potential))
    throw ValidationError(
        "fields.vector: diamagnetic takes its fields from [diamagnetic] fields");
  const double alpha = nonnegative(c.real("diamagnetic.alpha", 1.0), "diamagnetic.alpha");
  const auto fields = c.reals("diamagnetic.fields", {0.0, 0.5, 1.0, 2.0});
  const GridSpec gs = read_grid(c);
  const auto solver = read_solver(c, env.opts.seed);
  c.reject_unused();
  const Grid3D grid = gs.make([&] { return pekar::default_extent(pair, alpha); });
  const auto rep = pekar::diamagnetic_check(pair.scalar_potential, fields, alpha, grid, solver);

  Outcome out;
  out.table = {"diamagnetic", {"field", "energy", "margin", "converged"}, {}};
  for (const auto& p : rep.points) {
    out.table.rows.push_back({p.field, p.energy, p.margin, double(p.converged)});
    out.converged = out.converged && p.converged;
  }
  out.outputs = {{"ordered", rep.ordered},
                 {"monotone", rep.monotone},
                 {"solver_epsilon", rep.solver_epsilon}};
  out.provenance = {{"grid", grid_json(grid)}};
  return out;
}

Outcome weak_field(const Config& c, Env& env) {
  const PotentialPair pair = read_fields(c);
  const auto alphas = c.reals("weak-field.alphas", {2.0, 4.0, 8.0, 16.0});
  const double shift = c.real("weak-field.lambda_shift", 0.0);
  const GridSpec gs = read_grid(c);
  const auto solver = read_solver(c, env.opts.seed);
  c.reject_unused();
  const Grid3D grid = gs.make([] { return pekar::default_extent(PotentialPair{}, 1.0); });
  const auto rep = pekar::weak_field_scan(
      pair, alphas, [shift](double a) { return 1.0 + shift / a; }, grid, solver);

  Outcome out;
  out.table = {"weak-field",
               {"alpha", "lambda", "energy", "deviation", "envelope", "converged"},
               {}};
  for (const auto& p : rep.points) {
    out.table.rows.push_back(
        {p.alpha, p.lambda, p.energy, p.deviation, p.envelope, double(p.converged)});
    out.converged = out.converged && p.converged;
  }
  out.outputs = {{"reference", rep.reference}, {"monotone", rep.monotone}};
  out.provenance = {{"grid", grid_json(grid)}};
  return out;
}

bipolaron::BindingOptions read_binding(const Config& c, const std::string& section,
                                       Env& env, json& solves, bool& converged) {
  bipolaron::BindingOptions o;
  o.rank = c.integer(section + ".rank", o.rank);
  o.coarse_points = c.integer(section + ".coarse_points", o.coarse_points);
  o.fine_points = c.integer(section + ".fine_points", o.fine_points);
  o.extent = nonnegative(c.real(section + ".extent", 0.0), section + ".extent");
  o.boundary = read_boundary(c, section + ".boundary", "free-space");
  o.pt.tolerance =
      positive(c.real(section + ".pt_tolerance", o.pt.tolerance), section + ".pt_tolerance");
  o.pt.max_iterations = c.integer(section + ".pt_max_iterations", o.pt.max_iterations);
  o.pt.seed = env.opts.seed;
  o.pt.pekar = read_solver(c, env.opts.seed);
  o.pekar_solver = [&env, &solves, &converged](const pekar::PekarProblem& p,
                                               const pekar::MinimizeOptions& mo) {
    auto r = env.cache.get_or_solve(p, mo);
    json entry = solution_json(r.solution, r.hit);
    entry["grid"] = grid_json(p.grid);
    solves.push_back(std::move(entry));
    converged = converged && r.solution.converged;
    return std::move(r.solution);
  };
  return o;
}

const std::vector<std::string> kBindingColumns{
    "u", "twice_EP", "EPT_upper", "gap", "err_EP", "err_EPT", "certified"};

std::vector<double> binding_row(const bipolaron::BindingReport& r) {
  return {r.u, r.twice_EP, r.EPT_upper, r.gap, r.pekar.error, r.pt.error,
          double(r.certified)};
}

Outcome binding(const Config& c, Env& env) {
  const PotentialPair pair = read_fields(c);
  const auto us = c.reals("binding.u", {0.0, 2.0});
  Outcome out;
  json solves = json::array();
  bool pekar_ok = true;
  const auto opts = read_binding(c, "binding", env, solves, pekar_ok);
  c.reject_unused();
  const auto reports = bipolaron::binding_scan(pair, us, opts);

  out.table = {"binding", kBindingColumns, {}};
  json errs = json::array();
  for (const auto& r : reports) {
    out.table.rows.push_back(binding_row(r));
    errs.push_back(r.error_bar);
    out.converged = out.converged && r.converged;
  }
  out.converged = out.converged && pekar_ok;
  out.outputs = {{"error_bars", errs}};
  out.provenance = {{"pekar_solves", solves}};
  return out;
}

Outcome threshold(const Config& c, Env& env) {
  const PotentialPair pair = read_fields(c);
  const double u_min = nonnegative(c.real("threshold.u_min", 0.0), "threshold.u_min");
  const double u_max = c.real("threshold.u_max", 4.5);
  const double resolution =
      positive(c.real("threshold.resolution", 0.05), "threshold.resolution");
  if (!(u_max > u_min)) throw ValidationError("threshold.u_max: must exceed u_min");
  Outcome out;
  json solves = json::array();
  bool pekar_ok = true;
  const auto opts = read_binding(c, "threshold", env, solves, pekar_ok);
  c.reject_unused();
  const auto scan = bipolaron::threshold_scan(pair, u_min, u_max, resolution, opts);

  out.table = {"threshold", kBindingColumns, {}};
  for (const auto& r : scan.curve) {
    out.table.rows.push_back(binding_row(r));
    out.converged = out.converged && r.converged;
  }
  out.converged = out.converged && pekar_ok;
  out.outputs = {{"lower", scan.lower}, {"upper", scan.upper}};
  out.provenance = {{"pekar_solves", solves}};
  return out;
}

Outcome bound_budget(const Config& c, Env& env) {
  const PotentialPair pair = read_fields(c);
  const double alpha = positive(c.real_required("bound-budget.alpha"), "bound-budget.alpha");
  const std::string choice =
      c.word("bound-budget.choice", "paper", {"paper", "optimize", "explicit"});
  budget::BoundParams params;
  if (choice == "explicit") {
    params = {alpha, c.real_required("bound-budget.Lambda"),
              c.real_required("bound-budget.delta"), c.real_required("bound-budget.P"),
              c.real_required("bound-budget.DeltaE")};
    budget::validate(params);
  }
  Outcome out;
  const auto oracle = read_oracle(c, "bound-budget", pair, env, out);
  c.reject_unused();

  budget::BoundBudget b;
  if (choice == "optimize") {
    const auto r = budget::optimize_params(alpha, oracle.oracle);
    b = r.budget;
    out.outputs["optimizer_error"] = r.error;
    out.outputs["paper_error"] = r.paper_error;
    out.outputs["evaluations"] = r.evaluations;
  } else {
    if (choice == "paper") params = budget::paper_parameter_choice(alpha);
    b = budget::lower_bound_total(params, oracle.oracle);
  }
  const auto& p = b.params;
  out.table = {"bound-budget",
               {"alpha", "Lambda", "delta", "P", "DeltaE", "beta", "L", "mu",
                "block_count", "pekar_term", "block_error", "localization_error",
                "semibound_error", "total", "diverged"},
               {{p.alpha, p.Lambda, p.delta, p.P, p.DeltaE, b.beta, b.L, b.mu,
                 b.block_count, b.pekar_term, b.block_error, b.localization_error,
                 b.semibound_error, b.total, double(b.diverged)}}};
  out.outputs["total"] = b.total;
  out.outputs["divergent_terms"] = b.divergent_terms;
  out.provenance["oracle"] = oracle.description;
  return out;
}

Outcome sandwich(const Config& c, Env& env) {
  const PotentialPair pair = read_fields(c);
  const auto alphas = c.reals("sandwich.alphas", {1e1, 1e2, 1e3, 1e4});
  Outcome out;
  const auto oracle = read_oracle(c, "sandwich", pair, env, out);
  c.reject_unused();
  const auto rows = budget::sandwich_report(alphas, oracle.oracle);

  out.table = {"sandwich", {"alpha", "upper", "lower", "gap", "gap_over_alpha95"}, {}};
  json corrections = json::array();
  for (const auto& r : rows) {
    out.table.rows.push_back({r.alpha, r.upper, r.lower, r.gap, r.scaled_gap});
    corrections.push_back(r.concavity_correction);
  }
  out.outputs = {{"concavity_corrections", corrections}};
  out.provenance["oracle"] = oracle.description;
  return out;
}

Outcome fock_command(const Config& c, Env& env) {
  const PotentialPair pair = read_fields(c);
  const GridSpec gs = read_grid(c, 8, 8.0, "periodic");
  const Grid3D grid = gs.make([] { return 8.0; });
  const double Lambda = positive(c.real("fock.Lambda", 4.0), "fock.Lambda");
  const double P = positive(c.real("fock.P", 2.0 * kPi / grid.extent()), "fock.P");
  const int count = c.integer("fock.modes", 7);
  if (count < 1) throw ValidationError("fock.modes: must be >= 1");
  fock::BlockParams bp;
  bp.alpha = nonnegative(c.real("fock.alpha", 1.0), "fock.alpha");
  bp.beta = positive(c.real("fock.beta", 1.0), "fock.beta");
  bp.delta = nonnegative(c.real("fock.delta", 0.25), "fock.delta");
  bp.pair = pair;
  const int cutoff = c.integer("fock.cutoff", 1);
  if (cutoff < 0) throw ValidationError("fock.cutoff: must be >= 0");
  bp.cutoffs = {cutoff};
  bp.snap = c.word("fock.snap", "snap", {"snap", "reject"}) == "snap"
                ? fock::SnapPolicy::kSnap
                : fock::SnapPolicy::kReject;
  fock::GroundStateOptions go;
  go.tolerance = positive(c.real("fock.tolerance", 1e-6), "fock.tolerance");
  go.max_nonzeros = positive(c.real("fock.max_nonzeros", go.max_nonzeros), "fock.max_nonzeros");
  go.krylov_size = c.integer("fock.krylov_size", go.krylov_size);
  go.max_matvecs = c.integer("fock.max_matvecs", go.max_matvecs);
  go.seed = env.opts.seed;
  const auto solver = read_solver(c, env.opts.seed);
  c.reject_unused();

  const auto modes = fock::select_modes(Lambda, P, static_cast<std::size_t>(count));
  const auto rep = fock::pekar_ordering_check(grid, modes, bp, go, solver);

  Outcome out;
  out.table = {"fock",
               {"E_toy", "E_product", "E_coherent", "E_pekar_discrete", "lower",
                "upper_holds", "lower_holds", "residual", "matvecs"},
               {{rep.E_toy, rep.E_product, rep.E_coherent, rep.E_pekar_discrete,
                 rep.lower, double(rep.upper_holds), double(rep.lower_holds),
                 rep.ground.residual, double(rep.ground.matvecs)}}};
  out.outputs = {{"upper_holds", rep.upper_holds},
                 {"lower_holds", rep.lower_holds},
                 {"mu", rep.mu}};
  json mj = json::array();
  for (const auto& m : modes.modes)
    mj.push_back({{"index", m.index}, {"weight", m.weight}});
  out.provenance = {{"grid", grid_json(grid)},
                    {"modes", mj},
                    {"matvecs", rep.ground.matvecs},
                    {"restarts", rep.ground.restarts},
                    {"residual", rep.ground.residual}};
  out.converged = rep.ground.converged;
  out.warnings = rep.warnings;
  return out;
}

const std::map<std::string, Outcome (*)(const Config&, Env&)>& handlers() {
  static const std::map<std::string, Outcome (*)(const Config&, Env&)> h{
      {"pekar-solve", pekar_solve}, {"pekar-scan", pekar_scan},
      {"scaling", scaling},         {"concavity", concavity},
      {"diamagnetic", diamagnetic}, {"weak-field", weak_field},
      {"binding", binding},         {"threshold", threshold},
      {"bound-budget", bound_budget}, {"sandwich", sandwich},
      {"fock", fock_command}};
  return h;
}

std::string canonical(const std::string& command, const RawConfig& raw) {
  std::string s = "command=" + command + "\n";
  for (const auto& [k, v] : raw) s += k + "=" + v + "\n";
  return s;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunResult run(const RunOptions& opts) {
  RunResult result;
  try {
    if (opts.threads < 1) throw ValidationError("--threads: must be >= 1");
    const RawConfig raw = read_config(opts.config);
    const Config cfg(opts.command, raw);
    PekarCache cache(cache_root(opts.out));
    Env env{opts, cache};
    Outcome out = handlers().at(opts.command)(cfg, env);

    const auto csv = emit_csv(opts.out, out.table);
    result.artifacts.push_back(csv);
    for (const auto& w : cache.warnings()) out.warnings.push_back(w);

    json record;
    record["command"] = opts.command;
    record["config_hash"] = sha256_hex(canonical(opts.command, raw));
    record["seed"] = opts.seed;
    record["timestamp"] = utc_timestamp();
    record["outputs"] = out.outputs;
    record["artifacts"] = json::array({csv.filename().string()});
    record["provenance"] = out.provenance;
    record["provenance"]["cache_solves"] = cache.solves();
    record["status"] = out.converged ? "ok" : "not-converged";
    record["warnings"] = out.warnings;

    result.record = opts.out / (opts.command + ".json");
    std::ofstream f(result.record, std::ios::trunc);
    f << record.dump(2) << "\n";
    f.flush();
    if (!f) throw IoError("cannot write " + result.record.string());
    if (!out.converged) {
      result.exit_code = kNotConverged;
      result.message = opts.command + ": solver did not converge";
    }
  } catch (const ValidationError& e) {
    result = {kValidation, {}, {}, e.what()};
  } catch (const SizingError& e) {
    result = {kValidation, {}, {}, e.what()};
  } catch (const IoError& e) {
    result = {kIo, {}, {}, e.what()};
  } catch (const std::filesystem::filesystem_error& e) {
    result = {kIo, {}, {}, e.what()};
  } catch (const std::exception& e) {
    result = {kNotConverged, {}, {}, e.what()};
  }
  return result;
}

}  // namespace polaron::cli
