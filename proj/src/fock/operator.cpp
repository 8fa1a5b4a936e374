#include <algorithm>
#include <cmath>

#include "polaron/fft.hpp"
#include "polaron/fock.hpp"
#include "polaron/simd/kernels.hpp"

namespace polaron::fock {
namespace {

std::vector<int> expand_cutoffs(const std::vector<int>& cutoffs, std::size_t modes) {
  std::vector<int> out;
  if (cutoffs.size() == 1) {
    out.assign(modes, cutoffs[0]);
  } else if (cutoffs.size() == modes) {
    out = cutoffs;
  } else {
    throw ValidationError("need one boson cutoff, or one per mode");
  }
  for (int c : out)
    if (c < 1) throw ValidationError("boson cutoffs must be >= 1");
  return out;
}

constexpr std::size_t kMaxAssembleDimension = 200000;

}  // namespace

void TruncatedFockOperator::init_blocks() {
  strides_.assign(cutoffs_.size(), 1);
  blocks_ = 1;
  for (std::size_t n = 0; n < cutoffs_.size(); ++n) {
    strides_[n] = blocks_;
    const std::size_t next = blocks_ * static_cast<std::size_t>(cutoffs_[n] + 1);
    if (next / static_cast<std::size_t>(cutoffs_[n] + 1) != blocks_)
      throw ValidationError("truncated Fock space is too large to index");
    blocks_ = next;
  }
  if (nodes_ > 0 && blocks_ > static_cast<std::size_t>(-1) / nodes_)
    throw ValidationError("truncated Fock space is too large to index");
}

TruncatedFockOperator TruncatedFockOperator::phonon_sector(
    double number_coefficient, std::vector<cplx> couplings,
    std::vector<int> cutoffs) {
  if (couplings.empty()) throw ValidationError("phonon sector needs at least one mode");
  if (!std::isfinite(number_coefficient))
    throw ValidationError("number coefficient must be finite");
  TruncatedFockOperator op;
  op.cutoffs_ = expand_cutoffs(cutoffs, couplings.size());
  op.couplings_ = std::move(couplings);
  op.number_coefficient_ = number_coefficient;
  op.nodes_ = 1;
  op.init_blocks();
  return op;
}

TruncatedFockOperator build_block_hamiltonian(const Grid3D& grid,
                                              const ModeSet& modes,
                                              const BlockParams& params) {
  if (!(params.alpha >= 0.0) || !std::isfinite(params.alpha))
    throw ValidationError("alpha must be non-negative and finite");
  if (!(params.beta > 0.0) || !std::isfinite(params.beta))
    throw ValidationError("beta must be positive and finite");
  if (!(params.delta >= 0.0 && params.delta < 1.0))
    throw ValidationError("delta must lie in [0, 1)");
  if (modes.modes.empty()) throw ValidationError("mode set is empty");
  validate(modes);
  SnapResult snapped = snap_to_lattice(modes, grid, params.snap);

  TruncatedFockOperator op;
  op.params_ = params;
  op.modes_ = std::move(snapped.modes);
  op.warnings_ = std::move(snapped.warnings);
  op.grid_ = grid;
  op.cutoffs_ = expand_cutoffs(params.cutoffs, op.modes_.size());
  op.params_.cutoffs = op.cutoffs_;
  op.nodes_ = grid.size();
  op.init_blocks();
  op.kinetic_ = std::make_shared<KineticOperator>(grid, params.pair.vector_potential);
  op.potential_ = sample(params.pair.scalar_potential, grid);
  if (!op.kinetic_->has_vector_potential()) {
    const int n = grid.points();
    const auto& k2 = op.kinetic_->laplacian_symbol();
    op.laplacian_symbol_.resize(grid.size());
    const double scale = params.beta / static_cast<double>(grid.size());
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
          op.laplacian_symbol_[grid.index(ix, iy, iz)] =
              scale * (k2[ix] + k2[iy] + k2[iz]);
  }
  op.number_coefficient_ = 1.0 - params.delta;
  for (const Mode& m : op.modes_.modes) {
    op.couplings_.push_back(coupling_constant(params.alpha, m.weight));
    CVec ph(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double a = dot3(m.representative, grid.node(i));
      ph[i] = {std::cos(a), std::sin(a)};
    }
    op.phases_.push_back(std::move(ph));
  }
  return op;
}

double TruncatedFockOperator::nonzeros() const {
  const double electron_row = grid_ ? 3.0 * grid_->points() - 2.0 : 0.0;
  return static_cast<double>(dimension()) *
         (electron_row + 1.0 + 2.0 * static_cast<double>(cutoffs_.size()));
}

std::vector<int> TruncatedFockOperator::occupations(std::size_t block) const {
  std::vector<int> occ(cutoffs_.size());
  for (std::size_t n = 0; n < cutoffs_.size(); ++n) {
    occ[n] = static_cast<int>(block % static_cast<std::size_t>(cutoffs_[n] + 1));
    block /= static_cast<std::size_t>(cutoffs_[n] + 1);
  }
  return occ;
}

void TruncatedFockOperator::apply_electron(const cplx* in, cplx* out,
                                           double shift, CVec& spec) const {
  const std::size_t n = nodes_;
  if (!grid_) {
    out[0] = shift * in[0];
    return;
  }
  const double beta = params_.beta;
  if (!laplacian_symbol_.empty()) {
    const auto dims = grid_->dims();
    fft::forward(dims, in, spec.data());
    for (std::size_t i = 0; i < n; ++i) spec[i] *= laplacian_symbol_[i];
    fft::backward(dims, spec.data(), spec.data());
    for (std::size_t i = 0; i < n; ++i)
      out[i] = spec[i] + (potential_[i] + shift) * in[i];
    return;
  }
  kinetic_->apply({in, n}, {spec.data(), n});
  for (std::size_t i = 0; i < n; ++i)
    out[i] = beta * spec[i] + (potential_[i] + shift) * in[i];
}

void TruncatedFockOperator::apply(std::span<const cplx> in,
                                  std::span<cplx> out) const {
  if (in.size() != dimension() || out.size() != dimension())
    throw ValidationError("vector does not match the Fock space dimension");
  const std::size_t n = nodes_;
  const std::size_t modes = cutoffs_.size();
  CVec spec(n);
  std::vector<int> occ(modes, 0);
  for (std::size_t b = 0; b < blocks_; ++b) {
    int total = 0;
    for (int m : occ) total += m;
    apply_electron(in.data() + b * n, out.data() + b * n,
                   number_coefficient_ * total, spec);
    // next multi-index, mode 0 fastest
    for (std::size_t j = 0; j < modes; ++j) {
      if (++occ[j] <= cutoffs_[j]) break;
      occ[j] = 0;
    }
  }
  // Each lowering entry and its adjoint are written together.
  std::fill(occ.begin(), occ.end(), 0);
  for (std::size_t b = 0; b < blocks_; ++b) {
    for (std::size_t j = 0; j < modes; ++j) {
      if (occ[j] == 0) continue;
      const std::size_t lower = b - strides_[j];
      const cplx c = couplings_[j] * std::sqrt(static_cast<double>(occ[j]));
      const cplx* src_hi = in.data() + b * n;
      const cplx* src_lo = in.data() + lower * n;
      cplx* dst_lo = out.data() + lower * n;
      cplx* dst_hi = out.data() + b * n;
      if (phases_.empty()) {
        *dst_lo += c * *src_hi;
        *dst_hi += std::conj(c) * *src_lo;
      } else {
        const auto& t = simd::active();
        t.phase_mul_acc(c, phases_[j].data(), src_hi, dst_lo, n);
        t.conj_phase_mul_acc(std::conj(c), phases_[j].data(), src_lo, dst_hi, n);
      }
    }
    for (std::size_t j = 0; j < modes; ++j) {
      if (++occ[j] <= cutoffs_[j]) break;
      occ[j] = 0;
    }
  }
}

double TruncatedFockOperator::expectation(std::span<const cplx> psi) const {
  CVec h(psi.size());
  apply(psi, h);
  const double nrm = simd::norm_sq(psi);
  if (!(nrm > 0.0)) throw ValidationError("state has zero norm");
  return simd::dot(psi, h).real() / nrm;
}

Eigen::SparseMatrix<cplx> TruncatedFockOperator::assemble() const {
  const std::size_t dim = dimension();
  if (dim > kMaxAssembleDimension)
    throw ValidationError("dimension too large to assemble explicitly");
  std::vector<Eigen::Triplet<cplx>> entries;
  CVec e(dim, cplx{0.0, 0.0}), col(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    e[j] = 1.0;
    apply(e, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
      if (col[i] != cplx{0.0, 0.0})
        entries.emplace_back(static_cast<int>(i), static_cast<int>(j), col[i]);
  }
  Eigen::SparseMatrix<cplx> m(static_cast<int>(dim), static_cast<int>(dim));
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

double TruncatedFockOperator::hermiticity_error() const {
  const Eigen::SparseMatrix<cplx> m = assemble();
  const Eigen::SparseMatrix<cplx> adj = m.adjoint();
  const Eigen::SparseMatrix<cplx> diff = m - adj;
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(diff, k); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  return worst;
}

}  // namespace polaron::fock
