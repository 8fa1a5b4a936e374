#include "polaron/potentials.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace polaron {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const Vec3& v) {
  return "(" + fmt(v[0]) + "," + fmt(v[1]) + "," + fmt(v[2]) + ")";
}

// Corner antiderivative of 1/|x| for x, y, z >= 0.
double corner_primitive(double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  if (r == 0.0) return 0.0;
  double f = 0.0;
  if (y > 0.0 && z > 0.0) f += y * z * std::log(x + r);
  if (x > 0.0 && z > 0.0) f += x * z * std::log(y + r);
  if (x > 0.0 && y > 0.0) f += x * y * std::log(z + r);
  if (x > 0.0) f -= 0.5 * x * x * std::atan(y * z / (x * r));
  if (y > 0.0) f -= 0.5 * y * y * std::atan(x * z / (y * r));
  if (z > 0.0) f -= 0.5 * z * z * std::atan(x * y / (z * r));
  return f;
}

double positive_box_integral(const Vec3& lo, const Vec3& hi) {
  double s = 0.0;
  for (int c = 0; c < 8; ++c) {
    const double x = (c & 1) ? hi[0] : lo[0];
    const double y = (c & 2) ? hi[1] : lo[1];
    const double z = (c & 4) ? hi[2] : lo[2];
    const int highs = (c & 1) + ((c >> 1) & 1) + ((c >> 2) & 1);
    s += ((3 - highs) % 2 == 0 ? 1.0 : -1.0) * corner_primitive(x, y, z);
  }
  return s;
}

}  // namespace

bool is_zero(const VectorPotentialSpec& a) {
  return std::visit(
      Overloaded{
          [](const ZeroVectorPotential&) { return true; },
          [](const ConstantMagneticField& c) {
            return c.field[0] == 0.0 && c.field[1] == 0.0 && c.field[2] == 0.0;
          },
          [](const SampledVectorPotential& s) {
            for (const auto& comp : s.components)
              for (double v : comp)
                if (v != 0.0) return false;
            return true;
          }},
      a);
}

bool is_zero(const ScalarPotentialSpec& v) {
  return std::visit(
      Overloaded{[](const ZeroScalarPotential&) { return true; },
                 [](const CoulombPotential& c) { return c.charge == 0.0; },
                 [](const GaussianWell& g) { return g.depth == 0.0; },
                 [](const SampledScalarPotential& s) {
                   for (double x : s.values)
                     if (x != 0.0) return false;
                   return true;
                 }},
      v);
}

std::array<RVec, 3> sample(const VectorPotentialSpec& a, const Grid3D& grid) {
  std::array<RVec, 3> out;
  for (auto& c : out) c.assign(grid.size(), 0.0);
  std::visit(Overloaded{
                 [](const ZeroVectorPotential&) {},
                 [&](const ConstantMagneticField& c) {
                   for (std::size_t i = 0; i < grid.size(); ++i) {
                     const Vec3 bx = cross(c.field, grid.node(i));
                     for (int j = 0; j < 3; ++j) out[j][i] = 0.5 * bx[j];
                   }
                 },
                 [&](const SampledVectorPotential& s) {
                   for (int j = 0; j < 3; ++j) {
                     if (s.components[j].size() != s.grid.size())
                       throw ValidationError(
                           "sampled vector potential does not match its grid");
                     out[j] = resample(s.grid, s.components[j], grid);
                   }
                 }},
             a);
  return out;
}

RVec sample(const ScalarPotentialSpec& v, const Grid3D& grid) {
  RVec out(grid.size(), 0.0);
  const double h = grid.spacing();
  std::visit(
      Overloaded{
          [](const ZeroScalarPotential&) {},
          [&](const CoulombPotential& c) {
            // Rounding slack so a center on a cell face or corner is caught
            // the same way at every scale.
            const double reach = 0.5 * h * (1.0 + 1e-9);
            for (std::size_t i = 0; i < grid.size(); ++i) {
              const Vec3 x = grid.node(i);
              const Vec3 d{x[0] - c.center[0], x[1] - c.center[1],
                           x[2] - c.center[2]};
              bool contains = true;
              for (int a = 0; a < 3; ++a)
                if (std::abs(d[a]) > reach) contains = false;
              if (contains) {
                const Vec3 lo{d[0] - 0.5 * h, d[1] - 0.5 * h, d[2] - 0.5 * h};
                const Vec3 hi{d[0] + 0.5 * h, d[1] + 0.5 * h, d[2] + 0.5 * h};
                out[i] = -c.charge * box_integral_inverse_distance(lo, hi) /
                         (h * h * h);
              } else {
                out[i] = -c.charge / std::sqrt(dot3(d, d));
              }
            }
          },
          [&](const GaussianWell& g) {
            if (!(g.width > 0.0))
              throw ValidationError("gaussian well width must be positive");
            const double inv = 1.0 / (2.0 * g.width * g.width);
            for (std::size_t i = 0; i < grid.size(); ++i) {
              const Vec3 x = grid.node(i);
              const Vec3 d{x[0] - g.center[0], x[1] - g.center[1],
                           x[2] - g.center[2]};
              out[i] = g.depth * std::exp(-dot3(d, d) * inv);
            }
          },
          [&](const SampledScalarPotential& s) {
            if (s.values.size() != s.grid.size())
              throw ValidationError("sampled potential does not match its grid");
            out = resample(s.grid, s.values, grid);
          }},
      v);
  return out;
}

PotentialPair scale_potentials(const PotentialPair& pair, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ValidationError("scaling factor alpha must be positive");
  PotentialPair out;
  out.vector_potential = std::visit(
      Overloaded{
          [](const ZeroVectorPotential& z) -> VectorPotentialSpec { return z; },
          [&](const ConstantMagneticField& c) -> VectorPotentialSpec {
            const double s = alpha * alpha;
            return ConstantMagneticField{
                {s * c.field[0], s * c.field[1], s * c.field[2]}};
          },
          [&](const SampledVectorPotential& s) -> VectorPotentialSpec {
            SampledVectorPotential r{
                Grid3D(s.grid.points(), s.grid.extent() / alpha,
                       s.grid.boundary()),
                s.components};
            for (auto& comp : r.components)
              for (double& v : comp) v *= alpha;
            return r;
          }},
      pair.vector_potential);
  out.scalar_potential = std::visit(
      Overloaded{
          [](const ZeroScalarPotential& z) -> ScalarPotentialSpec { return z; },
          [&](const CoulombPotential& c) -> ScalarPotentialSpec {
            return CoulombPotential{alpha * c.charge,
                                    {c.center[0] / alpha, c.center[1] / alpha,
                                     c.center[2] / alpha}};
          },
          [&](const GaussianWell& g) -> ScalarPotentialSpec {
            return GaussianWell{alpha * alpha * g.depth, g.width / alpha,
                                {g.center[0] / alpha, g.center[1] / alpha,
                                 g.center[2] / alpha}};
          },
          [&](const SampledScalarPotential& s) -> ScalarPotentialSpec {
            SampledScalarPotential r{
                Grid3D(s.grid.points(), s.grid.extent() / alpha,
                       s.grid.boundary()),
                s.values};
            for (double& v : r.values) v *= alpha * alpha;
            return r;
          }},
      pair.scalar_potential);
  return out;
}

ScalarPotentialSpec scaled_by(const ScalarPotentialSpec& v, double lambda) {
  return std::visit(
      Overloaded{
          [](const ZeroScalarPotential& z) -> ScalarPotentialSpec { return z; },
          [&](const CoulombPotential& c) -> ScalarPotentialSpec {
            return CoulombPotential{lambda * c.charge, c.center};
          },
          [&](const GaussianWell& g) -> ScalarPotentialSpec {
            return GaussianWell{lambda * g.depth, g.width, g.center};
          },
          [&](const SampledScalarPotential& s) -> ScalarPotentialSpec {
            SampledScalarPotential r = s;
            for (double& x : r.values) x *= lambda;
            return r;
          }},
      v);
}

std::string describe(const VectorPotentialSpec& a) {
  return std::visit(
      Overloaded{
          [](const ZeroVectorPotential&) -> std::string { return "A=zero"; },
          [](const ConstantMagneticField& c) -> std::string {
            return "A=constant_field" + fmt(c.field);
          },
          [](const SampledVectorPotential& s) -> std::string {
            std::ostringstream os;
            os << "A=sampled(" << s.grid.points() << ","
               << fmt(s.grid.extent()) << ";";
            double sum = 0.0, sq = 0.0;
            for (const auto& comp : s.components)
              for (double v : comp) {
                sum += v;
                sq += v * v;
              }
            os << fmt(sum) << "," << fmt(sq) << ")";
            return os.str();
          }},
      a);
}

std::string describe(const ScalarPotentialSpec& v) {
  return std::visit(
      Overloaded{
          [](const ZeroScalarPotential&) -> std::string { return "V=zero"; },
          [](const CoulombPotential& c) -> std::string {
            return "V=coulomb(" + fmt(c.charge) + ";" + fmt(c.center) + ")";
          },
          [](const GaussianWell& g) -> std::string {
            return "V=gaussian_well(" + fmt(g.depth) + "," + fmt(g.width) +
                   ";" + fmt(g.center) + ")";
          },
          [](const SampledScalarPotential& s) -> std::string {
            double sum = 0.0, sq = 0.0;
            for (double x : s.values) {
              sum += x;
              sq += x * x;
            }
            return "V=sampled(" + std::to_string(s.grid.points()) + "," +
                   fmt(s.grid.extent()) + ";" + fmt(sum) + "," + fmt(sq) + ")";
          }},
      v);
}

std::string describe(const PotentialPair& pair) {
  return describe(pair.vector_potential) + ";" +
         describe(pair.scalar_potential);
}

double box_integral_inverse_distance(const Vec3& lo, const Vec3& hi) {
  // Split each axis at zero so every piece lies in the positive octant.
  double total = 0.0;
  for (int c = 0; c < 8; ++c) {
    Vec3 plo, phi;
    bool empty = false;
    for (int a = 0; a < 3; ++a) {
      const bool negative = (c >> a) & 1;
      double l = lo[a], h = hi[a];
      if (negative) {
        h = std::min(h, 0.0);
        if (h <= l) {
          empty = true;
          break;
        }
        plo[a] = -h;
        phi[a] = -l;
      } else {
        l = std::max(l, 0.0);
        if (h <= l) {
          empty = true;
          break;
        }
        plo[a] = l;
        phi[a] = h;
      }
    }
    if (!empty) total += positive_box_integral(plo, phi);
  }
  return total;
}

double cell_average_inverse_distance(double h) {
  const Vec3 lo{-0.5 * h, -0.5 * h, -0.5 * h};
  const Vec3 hi{0.5 * h, 0.5 * h, 0.5 * h};
  return box_integral_inverse_distance(lo, hi) / (h * h * h);
}

}  // namespace polaron
