#include <algorithm>
#include <cmath>
#include <sstream>

#include "polaron/fock.hpp"

namespace polaron::fock {
namespace {

class ModeSumInteraction final : public pekar::SelfInteraction {
 public:
  ModeSumInteraction(const Grid3D& grid, const ModeSet& modes) : grid_(grid) {
    for (const Mode& m : modes.modes) {
      CVec ph(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double a = dot3(m.representative, grid.node(i));
        ph[i] = {std::cos(a), std::sin(a)};
      }
      phases_.push_back(std::move(ph));
      weights_.push_back(m.weight * m.weight / (2.0 * kPi * kPi));
    }
  }

  void potential(std::span<const double> rho,
                 std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    const double dv = grid_.cell_volume();
    for (std::size_t n = 0; n < phases_.size(); ++n) {
      const CVec& ph = phases_[n];
      cplx hat{0.0, 0.0};
      for (std::size_t i = 0; i < rho.size(); ++i) hat += rho[i] * ph[i];
      hat *= dv;
      for (std::size_t i = 0; i < rho.size(); ++i)
        out[i] += weights_[n] * (std::conj(hat) * ph[i]).real();
    }
  }
  std::string describe() const override { return "mode-sum"; }

 private:
  Grid3D grid_;
  std::vector<CVec> phases_;
  std::vector<double> weights_;
};

}  // namespace

double ModeSet::weight_sum() const {
  double s = 0.0;
  for (const Mode& m : modes) s += m.weight * m.weight;
  return s;
}

void validate(const ModeSet& modes, double tol) {
  for (const Mode& m : modes.modes)
    if (!(m.weight > 0.0) || !std::isfinite(m.weight))
      throw ValidationError("mode weights must be positive and finite");
  if (modes.weight_sum() > 4.0 * kPi * modes.Lambda + tol)
    throw ValidationError("sum of squared mode weights exceeds 4 pi Lambda");
}

ModeSet select_modes(const budget::BlockPartition& partition, std::size_t count) {
  if (count == 0) throw ValidationError("mode count must be positive");
  if (count > partition.cells.size())
    throw ValidationError("partition has fewer cells than requested modes");
  std::vector<const budget::BlockCell*> order;
  for (const auto& c : partition.cells) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(),
                   [](const budget::BlockCell* a, const budget::BlockCell* b) {
                     return a->weight > b->weight;
                   });
  ModeSet out;
  out.Lambda = partition.Lambda;
  out.P = partition.P;
  for (std::size_t i = 0; i < count; ++i)
    out.modes.push_back({order[i]->index, order[i]->weight, order[i]->representative});
  std::sort(out.modes.begin(), out.modes.end(),
            [](const Mode& a, const Mode& b) { return a.index < b.index; });
  validate(out);
  return out;
}

ModeSet select_modes(double Lambda, double P, std::size_t count) {
  return select_modes(budget::block_partition(Lambda, P), count);
}

SnapResult snap_to_lattice(const ModeSet& modes, const Grid3D& grid,
                           SnapPolicy policy, double tol) {
  if (grid.boundary() != Boundary::kPeriodic)
    throw ValidationError("phonon momenta need a periodic electron grid");
  const double dk = 2.0 * kPi / grid.extent();
  const double nyquist = 0.5 * grid.points();
  SnapResult out{modes, {}};
  for (Mode& m : out.modes.modes) {
    Vec3 snapped;
    double moved = 0.0;
    for (int d = 0; d < 3; ++d) {
      const double q = std::round(m.representative[d] / dk);
      if (std::abs(q) > nyquist)
        throw ValidationError("phonon momentum lies beyond the grid's Nyquist band");
      snapped[d] = q * dk;
      moved = std::max(moved, std::abs(snapped[d] - m.representative[d]));
    }
    if (moved > tol) {
      std::ostringstream msg;
      msg << "mode (" << m.index[0] << "," << m.index[1] << "," << m.index[2]
          << ") representative moved by " << moved << " onto the reciprocal lattice";
      if (policy == SnapPolicy::kReject) throw ValidationError(msg.str());
      out.warnings.push_back(msg.str());
    }
    m.representative = snapped;
  }
  return out;
}

cplx density_transform(const RealField3D& rho, const Vec3& k) {
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < rho.values.size(); ++i) {
    const double a = dot3(k, rho.grid.node(i));
    s += rho.values[i] * cplx{std::cos(a), std::sin(a)};
  }
  return s * rho.grid.cell_volume();
}

std::shared_ptr<const pekar::SelfInteraction> mode_sum_interaction(
    const Grid3D& grid, const ModeSet& modes) {
  return std::make_shared<ModeSumInteraction>(grid, modes);
}

}  // namespace polaron::fock
