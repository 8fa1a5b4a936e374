#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "polaron/common.hpp"
#include "polaron/fft.hpp"

namespace polaron {

enum class Boundary { kPeriodic, kFreeSpace };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

// True when every prime factor of n is 2, 3, 5 or 7.
bool is_transform_friendly(int n);

// Uniform cubic grid, cell-centered and symmetric about the origin.
//
// Node i sits at (i + 1/2) h - extent/2 on every axis. Storage is x-fastest:
// (ix, iy, iz) -> ix + n (iy + n iz).
class Grid3D {
 public:
  // Throws SizingError for n < 8, non-friendly n, or extent <= 0.
  Grid3D(int points_per_axis, double extent, Boundary boundary);

  int points() const { return n_; }
  double extent() const { return extent_; }
  Boundary boundary() const { return boundary_; }
  double spacing() const { return h_; }
  double cell_volume() const { return h_ * h_ * h_; }
  std::size_t size() const {
    return static_cast<std::size_t>(n_) * n_ * n_;
  }
  fft::Dims dims() const { return {n_, n_, n_}; }
  // Free-space convolutions run on a grid doubled along every axis.
  int padded_points() const { return 2 * n_; }

  double coord(int i) const { return (i + 0.5) * h_ - 0.5 * extent_; }
  std::size_t index(int ix, int iy, int iz) const {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(n_) *
               (static_cast<std::size_t>(iy) +
                static_cast<std::size_t>(n_) * static_cast<std::size_t>(iz));
  }
  Vec3 node(std::size_t idx) const;

  // Angular wavenumber of FFT bin m (m in [0, n)), folded to [-n/2, n/2).
  double wavenumber(int m) const;

  // Same node coordinates (identical n, boundary, extent within 1e-12 rel).
  bool matches(const Grid3D& other) const;

 private:
  int n_;
  double extent_;
  Boundary boundary_;
  double h_;
};

inline Grid3D make_grid(int points_per_axis, double extent,
                        Boundary boundary) {
  return Grid3D(points_per_axis, extent, boundary);
}

struct RealField3D {
  Grid3D grid;
  RVec values;

  explicit RealField3D(const Grid3D& g) : grid(g), values(g.size(), 0.0) {}
  RealField3D(const Grid3D& g, RVec v);
  // h^3 sum values
  double integral() const;
};

struct ComplexField3D {
  Grid3D grid;
  CVec values;

  explicit ComplexField3D(const Grid3D& g)
      : grid(g), values(g.size(), cplx{0.0, 0.0}) {}
  ComplexField3D(const Grid3D& g, CVec v);

  // h^3 sum |values|^2
  double norm_sq() const;
  // Scales to unit L2 norm; throws ValidationError on the zero field.
  void normalize();
  bool is_normalized(double tol = 1e-12) const;
  RealField3D density() const;
};

// Trilinear interpolation onto another grid, zero outside the source box.
// Copies when the node sets coincide.
RVec resample(const Grid3D& src, const RVec& values, const Grid3D& dst);
CVec resample(const Grid3D& src, const CVec& values, const Grid3D& dst);
ComplexField3D resample(const ComplexField3D& f, const Grid3D& dst);

// <a, b> = h^3 sum conj(a) b
cplx inner(const ComplexField3D& a, const ComplexField3D& b);

// Flat little-endian float64 dump, x-fastest; complex values interleaved.
void export_binary(const std::filesystem::path& path, const RealField3D& f);
void export_binary(const std::filesystem::path& path, const ComplexField3D& f);

}  // namespace polaron
