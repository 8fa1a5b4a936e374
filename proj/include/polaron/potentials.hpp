#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>

#include "polaron/common.hpp"
#include "polaron/grid.hpp"

namespace polaron {

struct ZeroVectorPotential {};

// Symmetric gauge A(x) = (B x x) / 2.
struct ConstantMagneticField {
  Vec3 field{};
};

// Three real component fields on their own grid; resampled (trilinear, zero
// outside the box) when evaluated on a different grid.
struct SampledVectorPotential {
  Grid3D grid;
  std::array<RVec, 3> components;
};

using VectorPotentialSpec =
    std::variant<ZeroVectorPotential, ConstantMagneticField,
                 SampledVectorPotential>;

struct ZeroScalarPotential {};

// V(x) = -charge / |x - center|
struct CoulombPotential {
  double charge = 1.0;
  Vec3 center{};
};

// V(x) = depth * exp(-|x - center|^2 / (2 width^2))
struct GaussianWell {
  double depth = -1.0;
  double width = 1.0;
  Vec3 center{};
};

struct SampledScalarPotential {
  Grid3D grid;
  RVec values;
};

using ScalarPotentialSpec =
    std::variant<ZeroScalarPotential, CoulombPotential, GaussianWell,
                 SampledScalarPotential>;

struct PotentialPair {
  VectorPotentialSpec vector_potential = ZeroVectorPotential{};
  ScalarPotentialSpec scalar_potential = ZeroScalarPotential{};
};

bool is_zero(const VectorPotentialSpec& a);
bool is_zero(const ScalarPotentialSpec& v);

// Component-wise node values of A; all zero for the zero variant.
std::array<RVec, 3> sample(const VectorPotentialSpec& a, const Grid3D& grid);

// Node values of V. A Coulomb center is regularized by replacing -Z/|x-c| with
// its average over the cell of every node whose closed cell contains c.
RVec sample(const ScalarPotentialSpec& v, const Grid3D& grid);

// A_alpha(x) = alpha A(alpha x), V_alpha(x) = alpha^2 V(alpha x).
PotentialPair scale_potentials(const PotentialPair& pair, double alpha);

// lambda V
ScalarPotentialSpec scaled_by(const ScalarPotentialSpec& v, double lambda);

// Canonical text form, stable across runs; feeds cache keys and records.
std::string describe(const VectorPotentialSpec& a);
std::string describe(const ScalarPotentialSpec& v);
std::string describe(const PotentialPair& pair);

// Integral of 1/|x| over the box [lo, hi] (exact closed form).
double box_integral_inverse_distance(const Vec3& lo, const Vec3& hi);

// Mean of 1/|x| over the cube of side h centered at the origin.
double cell_average_inverse_distance(double h);

}  // namespace polaron
