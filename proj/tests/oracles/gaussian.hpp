#pragma once
// Closed forms for psi(x) = (2a/pi)^{3/4} exp(-a |x|^2).

#include <cmath>

namespace oracle::gaussian {

constexpr double kPi = 3.14159265358979323846;

inline double kinetic(double a) { return 3.0 * a; }
// <1/|x|> in |psi|^2
inline double inverse_distance(double a) {
  return 2.0 * std::sqrt(2.0 * a / kPi);
}
// D(|psi|^2, |psi|^2)
inline double self_energy(double a) { return 2.0 * std::sqrt(a / kPi); }
// |A|^2 term for A = (B x x)/2 with B = (0, 0, b): b^2 <x^2 + y^2> / 4
inline double magnetic(double a, double b) { return b * b / (8.0 * a); }
// Minimum of 3a - 2 sqrt(a/pi) at a = 1/(9 pi).
inline double family_minimum() { return -1.0 / (3.0 * kPi); }
inline double family_optimal_width() { return 1.0 / (9.0 * kPi); }

}  // namespace oracle::gaussian
