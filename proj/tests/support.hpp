#pragma once

#include <random>

#include "qfric/chain.hpp"
#include "qfric/thermal.hpp"

namespace qfric::test {

inline Matrix random_hermitian(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = Complex(normal(rng), normal(rng));
  return 0.5 * (a + a.adjoint());
}

// Full-rank random state, G G^dagger / Tr.
inline DensityMatrix random_state(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = Complex(normal(rng), normal(rng));
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix::from_matrix(rho);
}

inline DensityMatrix diagonal_state(const RealVector& p) {
  return DensityMatrix::from_matrix(p.cast<Complex>().asDiagonal().toDenseMatrix());
}

inline double shannon(const RealVector& p) {
  double s = 0.0;
  for (double x : p) if (x > 0.0) s -= x * std::log(x);
  return s;
}

}  // namespace qfric::test
