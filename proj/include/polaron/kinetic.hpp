#pragma once

#include <array>
#include <span>
#include <vector>

#include "polaron/common.hpp"
#include "polaron/grid.hpp"
#include "polaron/potentials.hpp"

namespace polaron {

// Discrete magnetic kinetic operator D_A^2 = sum_j (-i d_j + A_j)^2.
//
// Assembled as -Laplacian + sum_j {A_j, -i d_j} + |A|^2. Periodic grids use
// spectral derivatives (the first-derivative symbol vanishes on the Nyquist
// plane, the Laplacian keeps the full |k|^2); free-space grids use 4th-order
// centered differences with zeros outside the box. Both choices make the
// operator Hermitian and positive semidefinite on the grid.
class KineticOperator {
 public:
  KineticOperator(const Grid3D& grid, const VectorPotentialSpec& a);
  KineticOperator(const Grid3D& grid, std::array<RVec, 3> a_values);

  const Grid3D& grid() const { return grid_; }
  bool has_vector_potential() const { return !active_axes_.empty(); }
  const std::array<RVec, 3>& vector_potential() const { return a_; }

  // out = D_A^2 phi
  void apply(std::span<const cplx> phi, std::span<cplx> out) const;
  // h^3 <phi, D_A^2 phi>
  double energy(std::span<const cplx> phi) const;
  // r <- (sigma - Laplacian)^{-1} r, applied spectrally on either boundary.
  void precondition(std::span<cplx> r, double sigma) const;

  // Per-axis first-derivative symbol (zero at Nyquist) and Laplacian symbol.
  const std::vector<double>& derivative_symbol() const { return k1_; }
  const std::vector<double>& laplacian_symbol() const { return k2_; }

 private:
  void laplacian(std::span<const cplx> phi, std::span<cplx> out) const;
  void derivative(int axis, std::span<const cplx> phi,
                  std::span<cplx> out) const;

  Grid3D grid_;
  std::array<RVec, 3> a_;
  std::vector<int> active_axes_;
  std::vector<double> k1_;  // per-axis, length n
  std::vector<double> k2_;  // per-axis, length n
  std::vector<double> precond_k2_;  // per-axis spectral Laplacian symbol
};

// h^3 <phi, D_A^2 phi> with A sampled on phi's grid.
double kinetic_energy(const ComplexField3D& phi, const VectorPotentialSpec& a);

// h^3 sum V |phi|^2
double potential_energy(const ComplexField3D& phi,
                        const ScalarPotentialSpec& v);

}  // namespace polaron
