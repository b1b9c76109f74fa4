#pragma once

// Transverse-field Ising chain with a longitudinal field on a periodic ring,
//
//   H(h) = -g sum_j X_j X_{j+1} - h sum_j Z_j + L sum_j X_j,   X_{N+1} = X_1,
//
// plus dense Hermitian diagonalization with a reproducible eigenbasis.
//
// Site convention: site 1 is the leftmost factor of every tensor product, i.e.
// the most significant bit of a computational basis index. Bit value 0 is
// spin up (Z = +1), bit value 1 is spin down (Z = -1).

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qfric {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr int kDefaultMaxSites = 12;

struct ChainParams {
  int n_sites = 8;
  double coupling = 1.0;      // g, the energy unit
  double longitudinal = 0.0;  // L
  int max_sites = kDefaultMaxSites;

  void validate() const;
  Eigen::Index dim() const { return Eigen::Index{1} << n_sites; }
};

enum class Pauli { I, X, Y, Z };

Matrix pauli_matrix(Pauli p);

// Tensor product over n_sites with `ops` placed on the given 1-based sites and
// identities elsewhere.
Matrix pauli_string(int n_sites, std::span<const std::pair<int, Pauli>> ops);

class HermitianOperator {
 public:
  // Throws DomainError unless the matrix is square and Hermitian to
  // 1e-12 * max|entry|.
  explicit HermitianOperator(Matrix m);

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Matrix m_;
};

// Half-open index range [begin, end) of eigenvalues that are degenerate to
// within degeneracy_tolerance().
struct DegenerateBlock {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;
  Eigen::Index size() const { return end - begin; }
};

struct SpectralDecomposition {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // columns, unitary
  std::vector<DegenerateBlock> blocks;
  double spectral_radius = 0.0;

  Eigen::Index dim() const { return eigenvalues.size(); }
  double degeneracy_tolerance() const { return 1e-10 * spectral_radius; }
  Matrix reconstruct() const;
};

HermitianOperator build_hamiltonian(const ChainParams& params, double h);

// Eigenvectors come out phase-fixed (largest component real positive) and,
// inside each degenerate block, replaced by a canonical orthonormal basis of
// the eigenspace that depends only on the subspace itself. The block vectors
// are ordered lexicographically by their first non-negligible component.
SpectralDecomposition diagonalize(const HermitianOperator& op);

// One-site cyclic shift T with T|s_1 s_2 ... s_N> = |s_N s_1 ... s_{N-1}>.
Matrix translation_operator(int n_sites);

}  // namespace qfric
