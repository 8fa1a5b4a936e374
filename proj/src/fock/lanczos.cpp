#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "polaron/fock.hpp"
#include "polaron/simd/kernels.hpp"

namespace polaron::fock {
namespace {

struct Ritz {
  double value = 0.0;
  Eigen::VectorXd vector;
};

Ritz lowest_ritz(const std::vector<double>& a, const std::vector<double>& b) {
  const int m = static_cast<int>(a.size());
  Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
  for (int i = 0; i < m; ++i) diag[i] = a[i];
  for (int i = 0; i + 1 < m; ++i) sub[i] = b[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  return {es.eigenvalues()[0], es.eigenvectors().col(0)};
}

void normalize(CVec& v) {
  const double nrm = std::sqrt(simd::norm_sq(v));
  if (!(nrm > 0.0)) throw SolverError("Lanczos vector collapsed to zero");
  for (auto& x : v) x /= nrm;
}

}  // namespace

GroundState ground_state(const TruncatedFockOperator& op,
                         const GroundStateOptions& opts) {
  if (op.nonzeros() > opts.max_nonzeros)
    throw ValidationError("operator has " + std::to_string(op.nonzeros()) +
                          " nonzeros, above the configured maximum");
  if (!(opts.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
  if (opts.krylov_size < 2) throw ValidationError("krylov_size must be >= 2");
  const std::size_t dim = op.dimension();

  GroundState out;
  CVec v(dim), q(dim), q_prev(dim), w(dim);
  if (opts.start) {
    if (opts.start->size() != dim)
      throw ValidationError("start vector does not match the dimension");
    v = *opts.start;
  } else {
    std::mt19937_64 gen(opts.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& x : v) x = {u(gen), u(gen)};
  }
  normalize(v);

  auto step = [&](double alpha_j, double beta_prev) {
    // w = H q - alpha q - beta_prev q_prev
    op.apply(q, w);
    ++out.matvecs;
    simd::axpy(cplx{-alpha_j, 0.0}, q, w);
    if (beta_prev != 0.0) simd::axpy(cplx{-beta_prev, 0.0}, q_prev, w);
  };

  while (true) {
    std::vector<double> a, b;
    Ritz ritz;
    // First pass: coefficients only.
    q = v;
    std::fill(q_prev.begin(), q_prev.end(), cplx{0.0, 0.0});
    double beta_prev = 0.0;
    for (int j = 0; j < opts.krylov_size; ++j) {
      op.apply(q, w);
      ++out.matvecs;
      const double aj = simd::dot(q, w).real();
      simd::axpy(cplx{-aj, 0.0}, q, w);
      if (beta_prev != 0.0) simd::axpy(cplx{-beta_prev, 0.0}, q_prev, w);
      a.push_back(aj);
      const double bj = std::sqrt(simd::norm_sq(w));
      const bool last = j + 1 == opts.krylov_size ||
                        out.matvecs >= opts.max_matvecs || bj < 1e-13 * std::abs(aj);
      if (last || j % 5 == 4) {
        ritz = lowest_ritz(a, b);
        if (last || bj * std::abs(ritz.vector[j]) < 0.25 * opts.tolerance) break;
      }
      b.push_back(bj);
      std::swap(q_prev, q);
      for (std::size_t i = 0; i < dim; ++i) q[i] = w[i] / bj;
      beta_prev = bj;
    }
    const int steps = static_cast<int>(a.size());

    // Second pass: rebuild the Ritz vector from the same recurrence.
    q = v;
    std::fill(q_prev.begin(), q_prev.end(), cplx{0.0, 0.0});
    std::fill(v.begin(), v.end(), cplx{0.0, 0.0});
    for (int j = 0; j < steps; ++j) {
      simd::axpy(cplx{ritz.vector[j], 0.0}, q, v);
      if (j + 1 == steps) break;
      step(a[j], j > 0 ? b[j - 1] : 0.0);
      std::swap(q_prev, q);
      for (std::size_t i = 0; i < dim; ++i) q[i] = w[i] / b[j];
    }
    normalize(v);

    op.apply(v, w);
    ++out.matvecs;
    out.energy = simd::dot(v, w).real();
    simd::axpy(cplx{-out.energy, 0.0}, v, w);
    out.residual = std::sqrt(simd::norm_sq(w));
    if (out.residual < opts.tolerance) {
      out.converged = true;
      break;
    }
    if (out.matvecs >= opts.max_matvecs) break;
    ++out.restarts;
  }
  out.state = std::move(v);
  return out;
}

}  // namespace polaron::fock
