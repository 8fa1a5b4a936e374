#include "polaron/grid.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include "polaron/simd/kernels.hpp"

namespace polaron {

std::string to_string(Boundary b) {
  return b == Boundary::kPeriodic ? "periodic" : "zero-padded-free-space";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::kPeriodic;
  if (s == "zero-padded-free-space" || s == "free-space" || s == "free")
    return Boundary::kFreeSpace;
  throw ValidationError("unknown boundary '" + s + "'");
}

bool is_transform_friendly(int n) {
  if (n < 1) return false;
  for (int p : {2, 3, 5, 7})
    while (n % p == 0) n /= p;
  return n == 1;
}

Grid3D::Grid3D(int points_per_axis, double extent, Boundary boundary)
    : n_(points_per_axis), extent_(extent), boundary_(boundary), h_(0.0) {
  if (points_per_axis < 8)
    throw SizingError("grid needs at least 8 points per axis, got " +
                      std::to_string(points_per_axis));
  if (!is_transform_friendly(points_per_axis))
    throw SizingError("grid size " + std::to_string(points_per_axis) +
                      " has prime factors other than 2, 3, 5, 7");
  if (!(extent > 0.0) || !std::isfinite(extent))
    throw SizingError("grid extent must be positive and finite");
  h_ = extent_ / n_;
}

Vec3 Grid3D::node(std::size_t idx) const {
  const auto n = static_cast<std::size_t>(n_);
  const int ix = static_cast<int>(idx % n);
  const int iy = static_cast<int>((idx / n) % n);
  const int iz = static_cast<int>(idx / (n * n));
  return {coord(ix), coord(iy), coord(iz)};
}

double Grid3D::wavenumber(int m) const {
  const int folded = m < n_ / 2 ? m : m - n_;
  return 2.0 * kPi * folded / extent_;
}

bool Grid3D::matches(const Grid3D& other) const {
  return n_ == other.n_ && boundary_ == other.boundary_ &&
         std::abs(extent_ - other.extent_) <= 1e-12 * extent_;
}

RealField3D::RealField3D(const Grid3D& g, RVec v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size())
    throw ValidationError("field size does not match its grid");
}

double RealField3D::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_volume();
}

ComplexField3D::ComplexField3D(const Grid3D& g, CVec v)
    : grid(g), values(std::move(v)) {
  if (values.size() != grid.size())
    throw ValidationError("field size does not match its grid");
}

double ComplexField3D::norm_sq() const {
  return simd::norm_sq(values) * grid.cell_volume();
}

void ComplexField3D::normalize() {
  const double nrm = std::sqrt(norm_sq());
  if (!(nrm > 0.0)) throw ValidationError("cannot normalize the zero field");
  const double s = 1.0 / nrm;
  for (auto& v : values) v *= s;
}

bool ComplexField3D::is_normalized(double tol) const {
  return std::abs(norm_sq() - 1.0) <= tol;
}

RealField3D ComplexField3D::density() const {
  RealField3D rho(grid);
  simd::abs_sq(values, rho.values);
  return rho;
}

namespace {

template <class T, class Vec>
T interpolate(const Grid3D& g, const Vec& values, const Vec3& x) {
  const int n = g.points();
  int i0[3];
  double t[3];
  for (int a = 0; a < 3; ++a) {
    const double s = (x[a] + 0.5 * g.extent()) / g.spacing() - 0.5;
    if (s < -0.5 || s > n - 0.5) return T{};
    const double fl = std::floor(s);
    i0[a] = static_cast<int>(fl);
    t[a] = s - fl;
  }
  T acc{};
  for (int c = 0; c < 8; ++c) {
    double w = 1.0;
    int idx[3];
    bool inside = true;
    for (int a = 0; a < 3; ++a) {
      const int bit = (c >> a) & 1;
      idx[a] = i0[a] + bit;
      w *= bit ? t[a] : 1.0 - t[a];
      if (idx[a] < 0 || idx[a] >= n) inside = false;
    }
    if (w != 0.0 && inside) acc += w * values[g.index(idx[0], idx[1], idx[2])];
  }
  return acc;
}

template <class T, class Vec>
Vec resample_impl(const Grid3D& src, const Vec& values, const Grid3D& dst) {
  if (values.size() != src.size())
    throw ValidationError("field size does not match its grid");
  if (src.points() == dst.points() &&
      std::abs(src.extent() - dst.extent()) <= 1e-12 * src.extent())
    return values;
  Vec out(dst.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = interpolate<T>(src, values, dst.node(i));
  return out;
}

}  // namespace

RVec resample(const Grid3D& src, const RVec& values, const Grid3D& dst) {
  return resample_impl<double>(src, values, dst);
}

CVec resample(const Grid3D& src, const CVec& values, const Grid3D& dst) {
  return resample_impl<cplx>(src, values, dst);
}

ComplexField3D resample(const ComplexField3D& f, const Grid3D& dst) {
  return ComplexField3D(dst, resample(f.grid, f.values, dst));
}

cplx inner(const ComplexField3D& a, const ComplexField3D& b) {
  if (!a.grid.matches(b.grid)) throw ValidationError("grid mismatch in inner");
  return simd::dot(a.values, b.values) * a.grid.cell_volume();
}

namespace {

void write_doubles(const std::filesystem::path& path, const double* data,
                   std::size_t count) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(count * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      auto bits = std::bit_cast<std::uint64_t>(data[i]);
      bits = __builtin_bswap64(bits);
      out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void export_binary(const std::filesystem::path& path, const RealField3D& f) {
  write_doubles(path, f.values.data(), f.values.size());
}

void export_binary(const std::filesystem::path& path,
                   const ComplexField3D& f) {
  write_doubles(path, reinterpret_cast<const double*>(f.values.data()),
                2 * f.values.size());
}

}  // namespace polaron
