#pragma once

#include <vector>

#include "qfric/chain.hpp"

namespace qfric {

// Orthonormal basis adapted to the translation and reflection symmetries of a
// periodic chain. Columns are grouped in blocks: one per crystal momentum
// 2 pi k / N with 0 < k < N/2, its mirror image for N - k, and the k = 0 and
// k = N/2 sectors split by reflection parity. An operator that commutes with
// translation and reflection is block diagonal here, and a block and its
// mirror restrict it to the same matrix.
class MomentumSectors {
 public:
  explicit MomentumSectors(int n_sites);

  int n_sites() const { return n_sites_; }
  int n_blocks() const { return static_cast<int>(bases_.size()); }
  Eigen::Index dim() const { return Eigen::Index{1} << n_sites_; }

  // dim x m_b isometry.
  const Matrix& basis(int b) const { return bases_[b]; }
  // Index of the block this one mirrors, or -1.
  int mirror_of(int b) const { return mirror_[b]; }

  // P_b^dagger op P_b.
  Matrix restrict(const Matrix& op, int b) const;

  // Sum_b P_b block_b P_b^dagger.
  Matrix assemble(const std::vector<Matrix>& blocks) const;

 private:
  int n_sites_;
  std::vector<Matrix> bases_;
  std::vector<int> mirror_;
};

}  // namespace qfric
