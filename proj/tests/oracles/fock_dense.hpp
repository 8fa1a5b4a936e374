#pragma once
// Dense block Hamiltonian for tiny cases, built from the one-dimensional
// spectral second-derivative matrix and explicit occupation vectors.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "polaron/fock.hpp"

namespace oracle {

// (1/n) sum_m k_m^2 e^{i k_m (x_j - x_l)} on one periodic axis.
inline Eigen::MatrixXcd spectral_second_derivative(const polaron::Grid3D& g) {
  const int n = g.points();
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l)
      for (int m = 0; m < n; ++m) {
        const double k = g.wavenumber(m);
        const double a = k * (g.coord(j) - g.coord(l));
        d(j, l) += k * k * std::complex<double>(std::cos(a), std::sin(a)) / double(n);
      }
  return d;
}

// beta (-Laplacian) + V on the electron grid; A must be zero.
inline Eigen::MatrixXcd electron_matrix(const polaron::Grid3D& g, double beta,
                                        const polaron::PotentialPair& pair) {
  const int n = g.points();
  const int nodes = n * n * n;
  const Eigen::MatrixXcd d = spectral_second_derivative(g);
  const polaron::RVec v = polaron::sample(pair.scalar_potential, g);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(nodes, nodes);
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const int row = ix + n * (iy + n * iz);
        for (int t = 0; t < n; ++t) {
          h(row, t + n * (iy + n * iz)) += beta * d(ix, t);
          h(row, ix + n * (t + n * iz)) += beta * d(iy, t);
          h(row, ix + n * (iy + n * t)) += beta * d(iz, t);
        }
        h(row, row) += v[row];
      }
  return h;
}

inline Eigen::MatrixXcd dense_block_hamiltonian(const polaron::Grid3D& g,
                                                const polaron::fock::ModeSet& modes,
                                                double alpha, double beta,
                                                double delta,
                                                const polaron::PotentialPair& pair,
                                                int cutoff) {
  using cplx = std::complex<double>;
  const Eigen::MatrixXcd he = electron_matrix(g, beta, pair);
  const int nodes = static_cast<int>(he.rows());
  const int modes_n = static_cast<int>(modes.size());
  int blocks = 1;
  for (int j = 0; j < modes_n; ++j) blocks *= cutoff + 1;
  std::vector<std::vector<int>> occ(blocks, std::vector<int>(modes_n));
  for (int b = 0; b < blocks; ++b) {
    int r = b;
    for (int j = 0; j < modes_n; ++j) {
      occ[b][j] = r % (cutoff + 1);
      r /= cutoff + 1;
    }
  }
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(nodes * blocks, nodes * blocks);
  for (int b = 0; b < blocks; ++b) {
    int total = 0;
    for (int m : occ[b]) total += m;
    h.block(b * nodes, b * nodes, nodes, nodes) = he;
    for (int i = 0; i < nodes; ++i) h(b * nodes + i, b * nodes + i) += (1.0 - delta) * total;
  }
  for (int b = 0; b < blocks; ++b)
    for (int bp = 0; bp < blocks; ++bp)
      for (int j = 0; j < modes_n; ++j) {
        // <bp| a_j |b> = sqrt(m_j) when bp = b - e_j
        bool lowered = occ[b][j] >= 1 && occ[bp][j] == occ[b][j] - 1;
        for (int l = 0; l < modes_n && lowered; ++l)
          if (l != j && occ[bp][l] != occ[b][l]) lowered = false;
        if (!lowered) continue;
        const double gj = std::sqrt(alpha) * modes.modes[j].weight /
                          (std::sqrt(2.0) * polaron::kPi) * std::sqrt(double(occ[b][j]));
        for (int i = 0; i < nodes; ++i) {
          const polaron::Vec3 x = g.node(i);
          const double a = polaron::dot3(modes.modes[j].representative, x);
          const cplx ph(std::cos(a), std::sin(a));
          h(bp * nodes + i, b * nodes + i) += gj * ph;
          h(b * nodes + i, bp * nodes + i) += gj * std::conj(ph);
        }
      }
  return h;
}

}  // namespace oracle
