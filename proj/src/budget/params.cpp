#include <gsl/gsl_multimin.h>

#include <cmath>
#include <limits>
#include <memory>

#include "polaron/budget.hpp"

namespace polaron::budget {
namespace {

bool finite_positive(double v) { return v > 0.0 && std::isfinite(v); }

// |Lambda_P| estimated by the volume of ball + cube over the cell volume.
double steiner_count(double Lambda, double P) {
  const double r = Lambda / P;
  return 1.0 + 6.0 * r + 3.0 * kPi * r * r + 4.0 * kPi / 3.0 * r * r * r;
}

// Unconstrained search coordinates: Lambda = (8 alpha / pi)(1 + e^{x0}),
// delta = logistic(x1), P = e^{x2}, DeltaE = e^{x3}.
BoundParams decode(const gsl_vector* x, double alpha) {
  BoundParams p;
  p.alpha = alpha;
  p.Lambda = 8.0 * alpha / kPi * (1.0 + std::exp(gsl_vector_get(x, 0)));
  p.delta = 1.0 / (1.0 + std::exp(-gsl_vector_get(x, 1)));
  p.P = std::exp(gsl_vector_get(x, 2));
  p.DeltaE = std::exp(gsl_vector_get(x, 3));
  return p;
}

void assemble(BoundBudget& b, const PekarOracle& oracle) {
  b.pekar_term = b.beta * oracle(1.0 / b.beta, b.mu);
  const struct {
    const char* name;
    double value;
  } terms[] = {{"pekar_term", b.pekar_term},
               {"block_count", b.block_count},
               {"block_error", b.block_error},
               {"localization_error", b.localization_error}};
  for (const auto& t : terms)
    if (!std::isfinite(t.value)) {
      b.diverged = true;
      b.divergent_terms.emplace_back(t.name);
    }
  b.total = b.pekar_term - b.block_count - b.block_error - b.localization_error -
            b.semibound_error;
  if (b.diverged) b.total = -std::numeric_limits<double>::infinity();
}

}  // namespace

void validate(const BoundParams& p) {
  if (!finite_positive(p.alpha) || !finite_positive(p.Lambda) ||
      !finite_positive(p.delta) || !finite_positive(p.P) ||
      !finite_positive(p.DeltaE))
    throw ValidationError("bound parameters must be positive and finite");
  if (!(p.Lambda > 8.0 * p.alpha / kPi))
    throw ValidationError("Lambda must exceed 8 alpha / pi");
  if (!(p.delta < 1.0)) throw ValidationError("delta must be below 1");
}

BoundBudget derived_params(const BoundParams& p) {
  validate(p);
  BoundBudget b;
  b.params = p;
  b.beta = 1.0 - 8.0 * p.alpha / (kPi * p.Lambda);
  b.L = kPi * std::sqrt(3.0 * b.beta / p.DeltaE);
  b.mu = p.alpha / (b.beta * (1.0 - p.delta));
  b.weight_sum = 4.0 * kPi * p.Lambda;
  b.block_error =
      9.0 * p.alpha * p.P * p.P * b.L * b.L * p.Lambda / (2.0 * kPi * p.delta);
  b.localization_error = p.DeltaE;
  b.block_count = p.Lambda / p.P > kMaxCountRatio
                      ? std::numeric_limits<double>::infinity()
                      : block_count(p.Lambda, p.P);
  return b;
}

BoundParams paper_parameter_choice(double alpha) {
  if (!(alpha > 1.0) || !std::isfinite(alpha))
    throw ValidationError("paper parameter choice needs alpha > 1");
  return {alpha, 8.0 / kPi * std::pow(alpha, 1.2), std::pow(alpha, -0.2),
          std::pow(alpha, 0.6), std::pow(alpha, 1.8)};
}

PekarOracle free_pekar_oracle(double e_p) {
  return [e_p](double, double coupling) { return coupling * coupling * e_p; };
}

PekarOracle scaled_oracle(PekarOracle base, double s) {
  if (!(s > 0.0)) throw ValidationError("scale must be positive");
  return [base = std::move(base), s](double f, double c) {
    return s * s * base(f, c / s);
  };
}

BoundBudget lower_bound_total(const BoundParams& p, const PekarOracle& oracle) {
  BoundBudget b = derived_params(p);
  assemble(b, oracle);
  return b;
}

OptimizeResult optimize_params(double alpha, const PekarOracle& oracle) {
  const BoundParams paper = paper_parameter_choice(alpha);
  const double upper = alpha * alpha * oracle(1.0, 1.0);
  const PekarOracle scaled = scaled_oracle(oracle, alpha);

  struct Ctx {
    double alpha, upper;
    const PekarOracle* scaled;
    int evaluations = 0;
  } ctx{alpha, upper, &scaled};


  gsl_multimin_function fn;
  fn.n = 4;
  fn.params = &ctx;
  fn.f = [](const gsl_vector* x, void* raw) {
    auto* c = static_cast<Ctx*>(raw);
    ++c->evaluations;
    const BoundParams p = decode(x, c->alpha);
    if (!(p.delta < 1.0) || !(p.delta > 0.0) || !(p.Lambda > 8.0 * p.alpha / kPi) ||
        !finite_positive(p.P) || !finite_positive(p.DeltaE))
      return std::numeric_limits<double>::infinity();
    const double beta = 1.0 - 8.0 * p.alpha / (kPi * p.Lambda);
    const double L2 = kPi * kPi * 3.0 * beta / p.DeltaE;
    const double mu = p.alpha / (beta * (1.0 - p.delta));
    const double total = beta * (*c->scaled)(1.0 / beta, mu) -
                         steiner_count(p.Lambda, p.P) -
                         9.0 * p.alpha * p.P * p.P * L2 * p.Lambda / (2.0 * kPi * p.delta) -
                         p.DeltaE - 0.5;
    const double err = c->upper - total;
    return std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
  };

  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(4),
                                                             &gsl_vector_free),
      step(gsl_vector_alloc(4), &gsl_vector_free);
  gsl_vector_set(x.get(), 0, std::log(kPi * paper.Lambda / (8.0 * alpha) - 1.0));
  gsl_vector_set(x.get(), 1, std::log(paper.delta / (1.0 - paper.delta)));
  gsl_vector_set(x.get(), 2, std::log(paper.P));
  gsl_vector_set(x.get(), 3, std::log(paper.DeltaE));
  gsl_vector_set_all(step.get(), 0.5);

  // Two passes: the second restarts the simplex at the first optimum.
  for (int pass = 0; pass < 2; ++pass) {
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)>
        s(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 4),
          &gsl_multimin_fminimizer_free);
    gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());
    for (int it = 0; it < 4000; ++it) {
      if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), 1e-9) ==
          GSL_SUCCESS)
        break;
    }
    gsl_vector_memcpy(x.get(), gsl_multimin_fminimizer_x(s.get()));
    gsl_vector_set_all(step.get(), 0.1);
  }

  OptimizeResult out;
  out.evaluations = ctx.evaluations;
  const BoundBudget paper_budget = lower_bound_total(paper, scaled);
  out.paper_error = upper - paper_budget.total;
  out.params = decode(x.get(), alpha);
  out.budget = lower_bound_total(out.params, scaled);
  out.error = upper - out.budget.total;
  if (!(out.error <= out.paper_error)) {
    out.params = paper;
    out.budget = paper_budget;
    out.error = out.paper_error;
  }
  return out;
}

std::vector<SandwichRow> sandwich_report(const std::vector<double>& alphas,
                                         const PekarOracle& oracle) {
  for (std::size_t i = 1; i < alphas.size(); ++i)
    if (!(alphas[i] > alphas[i - 1]))
      throw ValidationError("alphas must be increasing");
  const double e_p = oracle(1.0, 1.0);
  std::vector<SandwichRow> rows;
  for (double a : alphas) {
    SandwichRow r;
    r.alpha = a;
    r.upper = a * a * e_p;
    r.budget = lower_bound_total(paper_parameter_choice(a), scaled_oracle(oracle, a));
    r.lower = r.budget.total;
    r.gap = r.upper - r.lower;
    r.scaled_gap = r.gap / std::pow(a, 1.8);
    const double beta = r.budget.beta;
    r.concavity_correction = e_p - oracle(1.0 / beta, 1.0 / (beta * beta));
    rows.push_back(r);
  }
  return rows;
}

double fitted_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("need at least two matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw ValidationError("log-log fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace polaron::budget
