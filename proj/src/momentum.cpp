#include "qfric/momentum.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <numbers>

#include "qfric/errors.hpp"

namespace qfric {

namespace {

Eigen::Index shift(Eigen::Index b, int n) { return (b >> 1) | ((b & 1) << (n - 1)); }

Eigen::Index reverse_bits(Eigen::Index b, int n) {
  Eigen::Index r = 0;
  for (int i = 0; i < n; ++i) r |= ((b >> i) & 1) << (n - 1 - i);
  return r;
}

Matrix reflect_rows(const Matrix& p, int n) {
  Matrix out(p.rows(), p.cols());
  for (Eigen::Index b = 0; b < p.rows(); ++b) out.row(reverse_bits(b, n)) = p.row(b);
  return out;
}

}  // namespace

MomentumSectors::MomentumSectors(int n_sites) : n_sites_(n_sites) {
  if (n_sites < 1) throw DomainError("momentum sectors need at least one site");
  const Eigen::Index d = dim();
  std::vector<std::vector<Eigen::VectorXcd>> columns(n_sites);
  std::vector<std::vector<int>> magnetization(n_sites);
  std::vector<bool> seen(d, false);
  for (Eigen::Index rep = 0; rep < d; ++rep) {
    if (seen[rep]) continue;
    std::vector<Eigen::Index> orbit{rep};
    seen[rep] = true;
    for (Eigen::Index b = shift(rep, n_sites); b != rep; b = shift(b, n_sites)) {
      orbit.push_back(b);
      seen[b] = true;
    }
    const int period = static_cast<int>(orbit.size());
    const double norm = 1.0 / std::sqrt(static_cast<double>(period));
    for (int k = 0; k < n_sites; ++k) {
      if ((k * period) % n_sites != 0) continue;
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
      for (int r = 0; r < period; ++r) {
        const double phase = -2.0 * std::numbers::pi * k * r / n_sites;
        v(orbit[r]) = norm * Complex(std::cos(phase), std::sin(phase));
      }
      columns[k].push_back(std::move(v));
      magnetization[k].push_back(std::popcount(static_cast<unsigned long>(rep)));
    }
  }
  auto sector = [&](int k) {
    Matrix p(d, static_cast<Eigen::Index>(columns[k].size()));
    for (std::size_t c = 0; c < columns[k].size(); ++c) p.col(static_cast<Eigen::Index>(c)) = columns[k][c];
    return p;
  };
  auto add = [&](Matrix p, int mirror) {
    if (p.cols() == 0) return;
    bases_.push_back(std::move(p));
    mirror_.push_back(mirror);
  };

  for (int k = 0; 2 * k <= n_sites; ++k) {
    const Matrix p = sector(k);
    if ((2 * k) % n_sites != 0) {
      add(p, -1);
      add(reflect_rows(p, n_sites), static_cast<int>(bases_.size()) - 1);
      continue;
    }
    // Self-mirrored sector: diagonalize the reflection inside each
    // magnetization group so that sum_j Z_j stays diagonal.
    const Matrix r = p.adjoint() * reflect_rows(p, n_sites);
    std::map<int, std::vector<Eigen::Index>> groups;
    for (Eigen::Index c = 0; c < p.cols(); ++c) groups[magnetization[k][static_cast<std::size_t>(c)]].push_back(c);
    std::vector<Eigen::VectorXcd> even, odd;
    for (const auto& [m, cols] : groups) {
      const auto n = static_cast<Eigen::Index>(cols.size());
      Matrix sub(n, n), emb(d, n);
      for (Eigen::Index a = 0; a < n; ++a) {
        emb.col(a) = p.col(cols[a]);
        for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = r(cols[a], cols[b]);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> solver(sub);
      const Matrix v = emb * solver.eigenvectors();
      for (Eigen::Index a = 0; a < n; ++a) (solver.eigenvalues()(a) > 0.0 ? even : odd).push_back(v.col(a));
    }
    for (auto* group : {&even, &odd}) {
      Matrix q(d, static_cast<Eigen::Index>(group->size()));
      for (std::size_t c = 0; c < group->size(); ++c) q.col(static_cast<Eigen::Index>(c)) = (*group)[c];
      add(std::move(q), -1);
    }
  }
}

Matrix MomentumSectors::restrict(const Matrix& op, int b) const {
  if (op.rows() != dim() || op.cols() != dim()) {
    throw DimensionError("operator dimension does not match momentum basis");
  }
  return bases_[b].adjoint() * op * bases_[b];
}

Matrix MomentumSectors::assemble(const std::vector<Matrix>& blocks) const {
  if (static_cast<int>(blocks.size()) != n_blocks()) {
    throw DimensionError("expected one matrix per symmetry block");
  }
  Matrix out = Matrix::Zero(dim(), dim());
  for (int b = 0; b < n_blocks(); ++b) {
    if (blocks[b].rows() != bases_[b].cols() || blocks[b].cols() != bases_[b].cols()) {
      throw DimensionError("matrix size does not match symmetry block");
    }
    out.noalias() += bases_[b] * blocks[b] * bases_[b].adjoint();
  }
  return out;
}

}  // namespace qfric
