#pragma once

#include <array>
#include <functional>

namespace oracle {

// Composite 5-point Gauss-Legendre rule on a box, `sub` panels per axis.
inline double box_quadrature(const std::function<double(double, double, double)>& f,
                             const std::array<double, 3>& lo,
                             const std::array<double, 3>& hi, int sub) {
  static constexpr double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                      0.5384693101056831, 0.9061798459386640};
  static constexpr double weights[5] = {0.2369268850561891, 0.4786286704993665,
                                        0.5688888888888889, 0.4786286704993665,
                                        0.2369268850561891};
  double len[3];
  for (int d = 0; d < 3; ++d) len[d] = (hi[d] - lo[d]) / sub;
  double sum = 0.0;
  for (int a = 0; a < sub; ++a)
    for (int i = 0; i < 5; ++i) {
      const double x = lo[0] + len[0] * (a + 0.5 + 0.5 * nodes[i]);
      const double wx = 0.5 * len[0] * weights[i];
      for (int b = 0; b < sub; ++b)
        for (int j = 0; j < 5; ++j) {
          const double y = lo[1] + len[1] * (b + 0.5 + 0.5 * nodes[j]);
          const double wy = wx * 0.5 * len[1] * weights[j];
          for (int c = 0; c < sub; ++c)
            for (int k = 0; k < 5; ++k) {
              const double z = lo[2] + len[2] * (c + 0.5 + 0.5 * nodes[k]);
              sum += wy * 0.5 * len[2] * weights[k] * f(x, y, z);
            }
        }
    }
  return sum;
}

}  // namespace oracle
