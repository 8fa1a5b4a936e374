#include <gsl/gsl_qrng.h>

#include <cmath>
#include <memory>

#include "polaron/budget.hpp"

namespace polaron::budget {

LocalizationProfile::LocalizationProfile(double L) : L_(L) {
  if (!(L > 0.0) || !std::isfinite(L))
    throw ValidationError("localization length must be positive");
}

double LocalizationProfile::value(const Vec3& x) const {
  double v = 1.0;
  for (double c : x) {
    if (std::abs(c) > 0.5 * L_) return 0.0;
    v *= std::cos(kPi * c / L_);
  }
  return v;
}

double LocalizationProfile::eigenvalue() const {
  return 3.0 * (kPi / L_) * (kPi / L_);
}

double LocalizationProfile::partition_integral(const Vec3& x,
                                               std::size_t samples) const {
  if (samples == 0) throw ValidationError("need at least one sample");
  std::unique_ptr<gsl_qrng, decltype(&gsl_qrng_free)> q(
      gsl_qrng_alloc(gsl_qrng_sobol, 3), &gsl_qrng_free);
  double sum = 0.0;
  double u[3];
  for (std::size_t s = 0; s < samples; ++s) {
    gsl_qrng_get(q.get(), u);
    // y ranges over the support of phi(x - y).
    Vec3 d;
    for (int j = 0; j < 3; ++j) {
      const double y = x[j] + (u[j] - 0.5) * L_;
      d[j] = x[j] - y;
    }
    const double v = value(d);
    sum += v * v;
  }
  return sum / static_cast<double>(samples) * L_ * L_ * L_;
}

}  // namespace polaron::budget
