#include "qfric/chain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qfric/errors.hpp"

namespace qfric {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// First index whose magnitude is within a relative 1e-6 of the maximum. Used
// so that near-ties are resolved by position rather than by rounding noise.
Eigen::Index leading_index(const Eigen::Ref<const Eigen::VectorXcd>& v) {
  const double peak = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= (1.0 - 1e-6) * peak) return i;
  }
  return 0;
}

Eigen::Index first_non_negligible(const Eigen::Ref<const Eigen::VectorXcd>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8) return i;
  }
  return v.size();
}

// Canonical orthonormal basis of span(block) by Gram-Schmidt on the projected
// unit vectors P e_i, pivoting on the largest residual. Works in the
// coefficient space of `block`, whose columns are orthonormal.
Matrix canonical_block_basis(const Matrix& block) {
  const Eigen::Index d = block.rows();
  const Eigen::Index m = block.cols();
  Matrix coeffs = block.adjoint();  // column i = block^dagger e_i
  Matrix accepted(m, m);
  std::vector<Eigen::Index> pivots;
  pivots.reserve(m);
  std::vector<bool> used(d, false);
  for (Eigen::Index k = 0; k < m; ++k) {
    double best = -1.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!used[i]) best = std::max(best, coeffs.col(i).squaredNorm());
    }
    Eigen::Index pivot = -1;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!used[i] && coeffs.col(i).squaredNorm() >= (1.0 - 1e-6) * best) {
        pivot = i;
        break;
      }
    }
    used[pivot] = true;
    pivots.push_back(pivot);
    Eigen::VectorXcd q = coeffs.col(pivot) / coeffs.col(pivot).norm();
    accepted.col(k) = q;
    // Remove the new direction from every remaining candidate.
    const Eigen::RowVectorXcd overlaps = q.adjoint() * coeffs;
    coeffs.noalias() -= q * overlaps;
  }
  Matrix basis = block * accepted;

  std::vector<Eigen::Index> order(m);
  for (Eigen::Index k = 0; k < m; ++k) order[k] = k;
  std::vector<Eigen::Index> first(m);
  for (Eigen::Index k = 0; k < m; ++k) first[k] = first_non_negligible(basis.col(k));
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (first[a] != first[b]) return first[a] < first[b];
    return pivots[a] < pivots[b];
  });
  Matrix sorted(d, m);
  for (Eigen::Index k = 0; k < m; ++k) sorted.col(k) = basis.col(order[k]);
  return sorted;
}

}  // namespace

void ChainParams::validate() const {
  if (n_sites < 1) throw DomainError("n_sites must be >= 1, got " + std::to_string(n_sites));
  if (n_sites > max_sites) {
    throw CapacityError("n_sites = " + std::to_string(n_sites) + " exceeds dense limit of " +
                        std::to_string(max_sites) + " sites");
  }
  if (!(coupling > 0.0) || !std::isfinite(coupling)) {
    throw DomainError("coupling g must be positive and finite");
  }
  if (!(longitudinal >= 0.0) || !std::isfinite(longitudinal)) {
    throw DomainError("longitudinal field L must be >= 0 and finite");
  }
}

Matrix pauli_matrix(Pauli p) {
  Matrix m = Matrix::Zero(2, 2);
  switch (p) {
    case Pauli::I:
      m(0, 0) = 1.0;
      m(1, 1) = 1.0;
      break;
    case Pauli::X:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case Pauli::Y:
      m(0, 1) = Complex(0.0, -1.0);
      m(1, 0) = Complex(0.0, 1.0);
      break;
    case Pauli::Z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
  }
  return m;
}

Matrix pauli_string(int n_sites, std::span<const std::pair<int, Pauli>> ops) {
  if (n_sites < 1) throw DomainError("pauli_string needs at least one site");
  std::vector<Matrix> factors(n_sites, pauli_matrix(Pauli::I));
  for (const auto& [site, op] : ops) {
    if (site < 1 || site > n_sites) {
      throw DomainError("site index " + std::to_string(site) + " outside 1.." +
                        std::to_string(n_sites));
    }
    // Repeated sites compose left to right.
    factors[site - 1] = factors[site - 1] * pauli_matrix(op);
  }
  Matrix out = factors[0];
  for (int j = 1; j < n_sites; ++j) out = kron(out, factors[j]);
  return out;
}

HermitianOperator::HermitianOperator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DimensionError("Hermitian operator must be square");
  const double scale = m_.size() > 0 ? m_.cwiseAbs().maxCoeff() : 0.0;
  const double asym = m_.size() > 0 ? (m_ - m_.adjoint()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > 1e-12 * scale) {
    throw DomainError("operator is not Hermitian: max|H - H^dagger| = " + std::to_string(asym));
  }
}

Matrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

HermitianOperator build_hamiltonian(const ChainParams& params, double h) {
  params.validate();
  if (!std::isfinite(h)) throw DomainError("transverse field must be finite");
  const int n = params.n_sites;
  Matrix H = Matrix::Zero(params.dim(), params.dim());
  for (int j = 1; j <= n; ++j) {
    const int next = j % n + 1;
    const std::pair<int, Pauli> bond[] = {{j, Pauli::X}, {next, Pauli::X}};
    H -= params.coupling * pauli_string(n, bond);
    const std::pair<int, Pauli> z[] = {{j, Pauli::Z}};
    H -= h * pauli_string(n, z);
    if (params.longitudinal != 0.0) {
      const std::pair<int, Pauli> x[] = {{j, Pauli::X}};
      H += params.longitudinal * pauli_string(n, x);
    }
  }
  return HermitianOperator(std::move(H));
}

SpectralDecomposition diagonalize(const HermitianOperator& op) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(op.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigensolver did not converge (dim " +
                         std::to_string(op.dim()) + ")");
  }
  SpectralDecomposition out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  const Eigen::Index d = out.dim();
  out.spectral_radius = d > 0 ? out.eigenvalues.cwiseAbs().maxCoeff() : 0.0;

  const double tol = out.degeneracy_tolerance();
  Eigen::Index begin = 0;
  for (Eigen::Index k = 1; k <= d; ++k) {
    if (k == d || out.eigenvalues(k) - out.eigenvalues(k - 1) > tol) {
      out.blocks.push_back({begin, k});
      begin = k;
    }
  }

  for (const auto& block : out.blocks) {
    if (block.size() == 1) {
      auto v = out.eigenvectors.col(block.begin);
      const Complex lead = v(leading_index(v));
      v *= std::conj(lead) / std::abs(lead);
    } else {
      Matrix sub = out.eigenvectors.middleCols(block.begin, block.size());
      out.eigenvectors.middleCols(block.begin, block.size()) = canonical_block_basis(sub);
      // Replace the eigenvalues of the block by their mean; they are equal to
      // tolerance and the replaced basis no longer tracks individual values.
      const double mean = out.eigenvalues.segment(block.begin, block.size()).mean();
      out.eigenvalues.segment(block.begin, block.size()).setConstant(mean);
    }
  }

  const double norm = op.matrix().norm();
  const double residual =
      (op.matrix() * out.eigenvectors - out.eigenvectors * out.eigenvalues.cast<Complex>().asDiagonal())
          .norm();
  if (residual > 1e-10 * std::max(norm, 1e-300) && residual > 1e-14) {
    throw NumericalError("eigendecomposition residual " + std::to_string(residual) +
                         " exceeds 1e-10 * ||H||_F = " + std::to_string(1e-10 * norm));
  }
  return out;
}

Matrix translation_operator(int n_sites) {
  if (n_sites < 1) throw DomainError("translation operator needs at least one site");
  const Eigen::Index d = Eigen::Index{1} << n_sites;
  Matrix T = Matrix::Zero(d, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    const Eigen::Index shifted = (b >> 1) | ((b & 1) << (n_sites - 1));
    T(shifted, b) = 1.0;
  }
  return T;
}

}  // namespace qfric
