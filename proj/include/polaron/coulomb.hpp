#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "polaron/common.hpp"
#include "polaron/grid.hpp"

namespace polaron {

// Free-space convolution with 1/|x| on a grid (Hockney zero padding).
//
// The grid is embedded in a box doubled along every axis so the circular
// convolution equals the aperiodic sum W_i = h^3 sum_j K(x_i - x_j) rho_j.
// K(0) is the mean of 1/|x| over one cell. The grid's boundary type is
// ignored: the Coulomb interaction is always taken in free space.
//
// Transforms skip the all-zero half of the padded input and the discarded
// half of the padded output. Safe for concurrent use.
class CoulombOperator {
 public:
  explicit CoulombOperator(const Grid3D& grid);
  ~CoulombOperator();
  CoulombOperator(const CoulombOperator&) = delete;
  CoulombOperator& operator=(const CoulombOperator&) = delete;

  // Small process-wide cache; operators for the same node set are shared.
  static std::shared_ptr<const CoulombOperator> shared(const Grid3D& grid);

  const Grid3D& grid() const { return grid_; }
  double kernel_at_origin() const { return k0_; }

  void potential(std::span<const double> rho, std::span<double> out) const;
  RVec potential(std::span<const double> rho) const;
  // Complex densities are convolved part by part.
  void potential(std::span<const cplx> g, std::span<cplx> out) const;

  // h^3 sum a_i W[b]_i
  double pair_energy(std::span<const double> a,
                     std::span<const double> b) const;
  // Bilinear (no conjugation): h^3 sum a_i W[b]_i
  cplx pair_energy(std::span<const cplx> a, std::span<const cplx> b) const;

 private:
  struct Scratch;
  struct Plans;
  std::unique_ptr<Scratch> acquire() const;
  void release(std::unique_ptr<Scratch> s) const;

  Grid3D grid_;
  int padded_;
  double k0_;
  RVec kernel_hat_;  // scaled by h^3 / padded volume
  std::unique_ptr<Plans> plans_;
  mutable std::mutex pool_mutex_;
  mutable std::vector<std::unique_ptr<Scratch>> pool_;
};

// D(rho, rho) = h^3 sum rho W[rho]; rho must be >= 0 with unit mass.
double coulomb_self_energy(const RealField3D& rho);

}  // namespace polaron
