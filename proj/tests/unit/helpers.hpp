#pragma once

#include <cmath>
#include <random>

#include "polaron/grid.hpp"

namespace testing_helpers {

inline polaron::ComplexField3D gaussian(const polaron::Grid3D& g, double a,
                                        polaron::Vec3 center = {},
                                        bool normalize = false) {
  polaron::ComplexField3D f(g);
  const double amp = std::pow(2.0 * a / 3.14159265358979323846, 0.75);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.node(i);
    double r2 = 0.0;
    for (int j = 0; j < 3; ++j) r2 += (x[j] - center[j]) * (x[j] - center[j]);
    f.values[i] = amp * std::exp(-a * r2);
  }
  if (normalize) f.normalize();
  return f;
}

// Smooth random state: Gaussian envelope times random low-order modulation.
inline polaron::ComplexField3D smooth_random(const polaron::Grid3D& g,
                                             unsigned seed, double a = 0.3) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  double c[4][2];
  for (auto& row : c)
    for (double& v : row) v = d(gen);
  polaron::ComplexField3D f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.node(i);
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    const polaron::cplx mod{c[0][0] + c[1][0] * x[0] + c[2][0] * x[1] +
                                c[3][0] * x[0] * x[2],
                            c[0][1] + c[1][1] * x[2] + c[2][1] * x[0] * x[1] +
                                c[3][1] * x[1]};
    f.values[i] = mod * std::exp(-a * r2);
  }
  f.normalize();
  return f;
}

}  // namespace testing_helpers
