#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <random>
#include <vector>

#include "polaron/budget.hpp"

namespace polaron::budget {
namespace {

void quiet_gsl() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

// Distance from 0 to the nearest point of [(n - 1/2) P, (n + 1/2) P].
double gap(long n, double P) {
  return n == 0 ? 0.0 : (std::abs(static_cast<double>(n)) - 0.5) * P;
}

struct Workspace {
  explicit Workspace(std::size_t n) : w(gsl_integration_workspace_alloc(n)) {}
  ~Workspace() { gsl_integration_workspace_free(w); }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
  gsl_integration_workspace* w;
};

constexpr std::size_t kLimit = 1000;

template <class F>
double integrate(F& f, double a, double b, std::vector<double> breaks,
                 double epsabs, double epsrel, Workspace& ws) {
  if (!(b > a)) return 0.0;
  gsl_function g;
  g.function = [](double x, void* p) { return (*static_cast<F*>(p))(x); };
  g.params = &f;
  // Split at 0, so no node lands on the k = 0 singularity, and at the kinks
  // where the sphere starts or stops clipping the cell.
  breaks.push_back(0.0);
  std::vector<double> pieces{a};
  for (double x : breaks)
    if (x > a && x < b) pieces.push_back(x);
  pieces.push_back(b);
  std::sort(pieces.begin(), pieces.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    if (!(pieces[i + 1] > pieces[i])) continue;
    double result = 0.0, err = 0.0;
    const int status = gsl_integration_qags(&g, pieces[i], pieces[i + 1], epsabs,
                                            epsrel, kLimit, ws.w, &result, &err);
    if (status != GSL_SUCCESS && status != GSL_EROUND)
      throw SolverError(std::string("cell quadrature failed: ") +
                        gsl_strerror(status));
    total += result;
  }
  return total;
}

// +-sqrt(r2 - c^2) for every c, where real.
std::vector<double> sphere_crossings(double r2, std::initializer_list<double> cs) {
  std::vector<double> out;
  for (double c : cs) {
    const double t = r2 - c * c;
    if (t > 0.0) {
      out.push_back(std::sqrt(t));
      out.push_back(-std::sqrt(t));
    }
  }
  return out;
}

// component: 0..2 for the moment k_j / |k|^2, 3 for 1 / |k|^2.
double cell_integral(double Lambda, double P, const std::array<int, 3>& n,
                     int component, double epsabs, double epsrel) {
  quiet_gsl();
  Workspace outer_ws(kLimit), inner_ws(kLimit);
  const double lo[3] = {(n[0] - 0.5) * P, (n[1] - 0.5) * P, (n[2] - 0.5) * P};
  const double hi[3] = {(n[0] + 0.5) * P, (n[1] + 0.5) * P, (n[2] + 0.5) * P};
  const double l2 = Lambda * Lambda;
  double kx = 0.0;
  auto inner = [&](double ky) {
    const double rho2 = kx * kx + ky * ky;
    const double rz = std::sqrt(std::max(0.0, l2 - rho2));
    const double za = std::max(lo[2], -rz), zb = std::min(hi[2], rz);
    if (!(zb > za)) return 0.0;
    if (component == 2) return 0.5 * std::log((rho2 + zb * zb) / (rho2 + za * za));
    const double rho = std::sqrt(rho2);
    const double f = (std::atan(zb / rho) - std::atan(za / rho)) / rho;
    return component == 0 ? kx * f : component == 1 ? ky * f : f;
  };
  std::vector<double> outer_breaks = sphere_crossings(l2, {lo[1], hi[1]});
  for (double y : {lo[1], hi[1], 0.0})
    for (double x : sphere_crossings(l2 - y * y, {lo[2], hi[2], 0.0}))
      outer_breaks.push_back(x);
  auto outer = [&](double x) {
    kx = x;
    const double ry = std::sqrt(std::max(0.0, l2 - x * x));
    return integrate(inner, std::max(lo[1], -ry), std::min(hi[1], ry),
                     sphere_crossings(l2 - x * x, {lo[2], hi[2]}),
                     0.1 * epsabs / P, 0.1 * epsrel, inner_ws);
  };
  return integrate(outer, std::max(lo[0], -Lambda), std::min(hi[0], Lambda),
                   outer_breaks, epsabs, epsrel, outer_ws);
}

void check_positive(double Lambda, double P) {
  if (!(Lambda > 0.0) || !(P > 0.0) || !std::isfinite(Lambda) || !std::isfinite(P))
    throw ValidationError("Lambda and P must be positive and finite");
}

}  // namespace

double block_count(double Lambda, double P) {
  check_positive(Lambda, P);
  if (Lambda / P > kMaxCountRatio)
    throw SizingError("Lambda / P too large for exact block counting");
  const long nmax = static_cast<long>(std::floor(Lambda / P + 0.5));
  const double l2 = Lambda * Lambda;
  std::uint64_t count = 0;
  for (long a = 0; a <= nmax; ++a) {
    const double da = gap(a, P);
    const double ra = l2 - da * da;
    if (ra < 0.0) break;
    const std::uint64_t ma = a == 0 ? 1 : 2;
    for (long b = 0; b <= nmax; ++b) {
      const double db = gap(b, P);
      const double r2 = ra - db * db;
      if (r2 < 0.0) break;
      const auto m = static_cast<std::uint64_t>(std::floor(std::sqrt(r2) / P + 0.5));
      count += ma * (b == 0 ? 1 : 2) * (2 * m + 1);
    }
  }
  return static_cast<double>(count);
}

CellIntegrals cell_integrals(double Lambda, double P,
                             const std::array<int, 3>& n, double rel_tol) {
  check_positive(Lambda, P);
  CellIntegrals out;
  try {
    out.weight_sq = cell_integral(Lambda, P, n, 3, 0.0, rel_tol);
  } catch (const SolverError&) {
    // Slivers where the sphere barely clips the cell: the relative target is
    // below rounding, so fall back to a floor on the scale of the ball.
    out.weight_sq = cell_integral(Lambda, P, n, 3, 1e-3 * rel_tol * 4.0 * kPi * Lambda,
                                  rel_tol);
  }
  // Moments can vanish by symmetry; use an absolute floor.
  const double floor = rel_tol * out.weight_sq * (std::abs(n[0]) + std::abs(n[1]) +
                                                  std::abs(n[2]) + 1) * P;
  for (int j = 0; j < 3; ++j)
    out.moment[j] = cell_integral(Lambda, P, n, j, floor, rel_tol);
  return out;
}

BlockPartition block_partition(double Lambda, double P, std::size_t max_cells) {
  const double count = block_count(Lambda, P);
  if (count > static_cast<double>(max_cells))
    throw SizingError("block partition exceeds the cell limit");
  BlockPartition out;
  out.Lambda = Lambda;
  out.P = P;
  const int nmax = static_cast<int>(std::floor(Lambda / P + 0.5));
  const double l2 = Lambda * Lambda;
  for (int i = -nmax; i <= nmax; ++i)
    for (int j = -nmax; j <= nmax; ++j)
      for (int k = -nmax; k <= nmax; ++k) {
        const double d = gap(i, P) * gap(i, P) + gap(j, P) * gap(j, P) +
                         gap(k, P) * gap(k, P);
        if (d > l2) continue;
        BlockCell cell;
        cell.index = {i, j, k};
        const CellIntegrals ci = cell_integrals(Lambda, P, cell.index);
        cell.weight = std::sqrt(ci.weight_sq);
        for (int a = 0; a < 3; ++a)
          cell.representative[a] = ci.moment[a] / ci.weight_sq;
        out.weight_sum += ci.weight_sq;
        out.cells.push_back(cell);
      }
  return out;
}

PhaseBoundReport phase_bound_check(double P, double L, std::size_t samples,
                                   std::uint64_t seed,
                                   const Vec3& representative_offset) {
  if (!(P > 0.0) || !(L > 0.0)) throw ValidationError("P and L must be positive");
  if (samples < 1000) throw ValidationError("phase bound check needs >= 1000 samples");
  for (double o : representative_offset)
    if (std::abs(o) > 0.5 * P)
      throw ValidationError("representative lies outside the cell");
  PhaseBoundReport rep;
  rep.paper_bound = 1.5 * P * L;
  rep.centered_bound = 0.75 * P * L;
  const double limit = std::min(2.0, rep.paper_bound) * (1.0 + 1e-12);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ux(-0.5 * L, 0.5 * L), uk(-0.5 * P, 0.5 * P);
  for (std::size_t s = 0; s < samples; ++s) {
    Vec3 x, dk;
    for (int j = 0; j < 3; ++j) {
      x[j] = ux(gen);
      dk[j] = uk(gen) - representative_offset[j];
    }
    const double dev = 2.0 * std::abs(std::sin(0.5 * dot3(dk, x)));
    rep.max_deviation = std::max(rep.max_deviation, dev);
    rep.product_bound = std::max(rep.product_bound,
                                 std::sqrt(dot3(dk, dk) * dot3(x, x)));
    if (dev > limit) ++rep.violations;
  }
  return rep;
}

}  // namespace polaron::budget
