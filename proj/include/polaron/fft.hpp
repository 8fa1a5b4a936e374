#pragma once
// Thin wrapper over FFTW for 3D transforms on x-fastest arrays.
//
// dims = {nx, ny, nz}; element (ix, iy, iz) lives at ix + nx*(iy + ny*iz).
// Transforms are unnormalized. Plans are created once per shape with
// FFTW_ESTIMATE (deterministic, no timing-dependent algorithm choice) and
// shared across threads; execution is thread-safe.

#include <array>
#include <cstddef>
#include <mutex>

#include "polaron/common.hpp"

namespace polaron::fft {

using Dims = std::array<int, 3>;

inline std::size_t volume(const Dims& d) {
  return static_cast<std::size_t>(d[0]) * d[1] * d[2];
}
// Number of complex outputs of a real-to-complex transform (x halved).
inline std::size_t half_volume(const Dims& d) {
  return static_cast<std::size_t>(d[0] / 2 + 1) * d[1] * d[2];
}

void forward(const Dims& dims, const cplx* in, cplx* out);
void backward(const Dims& dims, const cplx* in, cplx* out);
void r2c(const Dims& dims, const double* in, cplx* out);
// Overwrites `in`.
void c2r(const Dims& dims, cplx* in, double* out);

// FFTW's planner is not thread-safe; code building its own plans holds this.
std::mutex& planner_mutex();

}  // namespace polaron::fft
