#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

namespace polaron {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;

// 64-byte aligned storage so FFT plans and AVX loads can assume alignment.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t kAlignment = 64;

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    if (n == 0) return nullptr;
    void* p = ::operator new(n * sizeof(T), std::align_val_t{kAlignment});
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept {
    ::operator delete(p, std::align_val_t{kAlignment});
  }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using RVec = std::vector<double, AlignedAllocator<double>>;
using CVec = std::vector<cplx, AlignedAllocator<cplx>>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid sizes that cannot be transformed or are non-positive.
class SizingError : public Error {
 public:
  using Error::Error;
};

// Inputs violating a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

inline double dot3(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

}  // namespace polaron
