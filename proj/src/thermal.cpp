#include "qfric/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <string>

#include "qfric/errors.hpp"

namespace qfric {

namespace {

constexpr double kTraceTol = 1e-10;
constexpr double kNegativeClamp = 1e-10;

RealVector numerical_logs(const RealVector& w) {
  RealVector out(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    out(i) = w(i) > 0.0 ? std::log(w(i)) : -std::numeric_limits<double>::infinity();
  }
  return out;
}

void check_weights(const RealVector& w) {
  if (w.size() == 0) throw DimensionError("density matrix must have positive dimension");
  if (std::abs(w.sum() - 1.0) > kTraceTol) {
    throw DomainError("density matrix trace " + std::to_string(w.sum()) + " differs from 1");
  }
  if (w.minCoeff() < -kNegativeClamp) {
    throw DomainError("density matrix is not positive semidefinite: eigenvalue " +
                      std::to_string(w.minCoeff()));
  }
}

// Shifted Boltzmann log-weights -(E_n - E_0)/T - log Z'.
RealVector gibbs_log_weights(const RealVector& energies, double T) {
  const Eigen::Index d = energies.size();
  RealVector logs(d);
  if (std::isinf(T)) {
    logs.setConstant(-std::log(static_cast<double>(d)));
    return logs;
  }
  const double e0 = energies.minCoeff();
  logs = -(energies.array() - e0) / T;
  const double log_z = std::log(logs.array().exp().sum());
  logs.array() -= log_z;
  return logs;
}

double entropy_from_logs(const RealVector& w, const RealVector& logs) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) > 0.0 && std::isfinite(logs(i))) s -= w(i) * logs(i);
  }
  return s;
}

Eigen::Index ground_degeneracy(const SpectralDecomposition& spec) {
  return spec.blocks.empty() ? 1 : spec.blocks.front().size();
}

}  // namespace

const char* to_string(StateRole role) {
  switch (role) {
    case StateRole::Generic:
      return "generic";
    case StateRole::Initial:
      return "initial";
    case StateRole::Evolved:
      return "evolved";
    case StateRole::Adiabatic:
      return "adiabatic";
    case StateRole::Thermal:
      return "thermal";
    case StateRole::DiagonalProjected:
      return "diagonal-projected";
  }
  return "unknown";
}

DensityMatrix DensityMatrix::from_matrix(const Matrix& m, StateRole role) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError("density matrix must be square and non-empty");
  }
  HermitianOperator h(m);  // Hermiticity check
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalError("density matrix eigensolver failed");
  RealVector w = solver.eigenvalues();
  if (std::abs(w.sum() - 1.0) > kTraceTol) {
    throw DomainError("density matrix trace " + std::to_string(w.sum()) + " differs from 1");
  }
  if (w.minCoeff() < -kNegativeClamp) {
    throw DomainError("density matrix is not positive semidefinite: eigenvalue " +
                      std::to_string(w.minCoeff()));
  }
  w = w.cwiseMax(0.0);
  auto impl = std::make_shared<Impl>();
  impl->basis = solver.eigenvectors();
  impl->log_weights = numerical_logs(w);
  impl->weights = std::move(w);
  impl->exact_logs = false;
  impl->role = role;
  return DensityMatrix(std::move(impl));
}

DensityMatrix DensityMatrix::from_spectrum(Matrix basis, RealVector weights, RealVector log_weights,
                                           StateRole role) {
  if (basis.rows() != basis.cols() || basis.cols() != weights.size() ||
      log_weights.size() != weights.size()) {
    throw DimensionError("spectral density matrix parts have inconsistent sizes");
  }
  check_weights(weights);
  auto impl = std::make_shared<Impl>();
  impl->basis = std::move(basis);
  impl->weights = weights.cwiseMax(0.0);
  impl->log_weights = std::move(log_weights);
  impl->exact_logs = true;
  impl->role = role;
  return DensityMatrix(std::move(impl));
}

DensityMatrix DensityMatrix::from_spectrum(Matrix basis, RealVector weights, StateRole role) {
  if (basis.rows() != basis.cols() || basis.cols() != weights.size()) {
    throw DimensionError("spectral density matrix parts have inconsistent sizes");
  }
  check_weights(weights);
  auto impl = std::make_shared<Impl>();
  impl->basis = std::move(basis);
  impl->weights = weights.cwiseMax(0.0);
  impl->log_weights = numerical_logs(impl->weights);
  impl->exact_logs = false;
  impl->role = role;
  return DensityMatrix(std::move(impl));
}

const Matrix& DensityMatrix::matrix() const {
  std::call_once(impl_->dense_once, [this] {
    impl_->dense = impl_->basis * impl_->weights.cast<Complex>().asDiagonal() * impl_->basis.adjoint();
  });
  return impl_->dense;
}

DensityMatrix DensityMatrix::with_role(StateRole role) const {
  auto impl = std::make_shared<Impl>();
  impl->basis = impl_->basis;
  impl->weights = impl_->weights;
  impl->log_weights = impl_->log_weights;
  impl->exact_logs = impl_->exact_logs;
  impl->role = role;
  return DensityMatrix(std::move(impl));
}

RealVector DensityMatrix::populations_in(const Matrix& vectors) const {
  if (vectors.rows() != dim()) throw DimensionError("basis dimension does not match state");
  const Matrix overlap = vectors.adjoint() * impl_->basis;
  return overlap.cwiseAbs2() * impl_->weights;
}

void PopulationDistribution::validate() const {
  if (p.size() == 0) throw DimensionError("empty population distribution");
  if (p.minCoeff() < -1e-12) throw DomainError("negative population " + std::to_string(p.minCoeff()));
  if (std::abs(p.sum() - 1.0) > 1e-10) {
    throw DomainError("populations sum to " + std::to_string(p.sum()));
  }
}

DensityMatrix gibbs_state(const SpectralDecomposition& spec, double T) {
  if (std::isnan(T) || T <= 0.0) {
    throw DomainError("Gibbs state needs T > 0, got " + std::to_string(T));
  }
  RealVector logs = gibbs_log_weights(spec.eigenvalues, T);
  RealVector w = logs.array().exp();
  w /= w.sum();  // absorb rounding in the normalization
  return DensityMatrix::from_spectrum(spec.eigenvectors, std::move(w), std::move(logs),
                                      StateRole::Thermal);
}

double thermal_entropy(const SpectralDecomposition& spec, double T) {
  if (std::isnan(T) || T < 0.0) throw DomainError("temperature must be >= 0");
  if (T == 0.0) return std::log(static_cast<double>(ground_degeneracy(spec)));
  const RealVector logs = gibbs_log_weights(spec.eigenvalues, T);
  const RealVector w = logs.array().exp();
  return entropy_from_logs(w, logs);
}

double thermal_energy(const SpectralDecomposition& spec, double T) {
  if (std::isnan(T) || T < 0.0) throw DomainError("temperature must be >= 0");
  if (T == 0.0) return spec.eigenvalues(0);
  const RealVector w = gibbs_log_weights(spec.eigenvalues, T).array().exp();
  return w.dot(spec.eigenvalues) / w.sum();
}

double von_neumann_entropy(const DensityMatrix& rho) {
  return entropy_from_logs(rho.weights(), rho.log_weights());
}

std::pair<DensityMatrix, PopulationDistribution> project_diagonal(const DensityMatrix& rho,
                                                                  const SpectralDecomposition& basis) {
  if (rho.dim() != basis.dim()) {
    throw DimensionError("state dimension " + std::to_string(rho.dim()) +
                         " does not match basis dimension " + std::to_string(basis.dim()));
  }
  const Matrix overlap = basis.eigenvectors.adjoint() * rho.basis();
  const RealVector& w = rho.weights();
  RealVector pops(basis.dim());
  Matrix vectors = basis.eigenvectors;
  for (const auto& block : basis.blocks) {
    if (block.size() == 1) {
      pops(block.begin) = overlap.row(block.begin).cwiseAbs2().dot(w);
      continue;
    }
    const auto rows = overlap.middleRows(block.begin, block.size());
    const Matrix restricted = rows * w.cast<Complex>().asDiagonal() * rows.adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(restricted);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("degenerate-block eigensolver failed in diagonal projection");
    }
    // Descending inside the block.
    const Eigen::Index m = block.size();
    for (Eigen::Index k = 0; k < m; ++k) {
      pops(block.begin + k) = solver.eigenvalues()(m - 1 - k);
    }
    const Matrix rotation = solver.eigenvectors().rowwise().reverse();
    vectors.middleCols(block.begin, m) = basis.eigenvectors.middleCols(block.begin, m) * rotation;
  }
  if (pops.minCoeff() < -kNegativeClamp) {
    throw NumericalError("diagonal projection produced a negative population " +
                         std::to_string(pops.minCoeff()));
  }
  pops = pops.cwiseMax(0.0);
  PopulationDistribution dist{pops};
  return {DensityMatrix::from_spectrum(std::move(vectors), std::move(pops),
                                       StateRole::DiagonalProjected),
          std::move(dist)};
}

double diagonal_entropy(const DensityMatrix& rho, const SpectralDecomposition& basis) {
  return von_neumann_entropy(project_diagonal(rho, basis).first);
}

double temperature_for_entropy(double entropy, const SpectralDecomposition& spec_f) {
  const double s_max = std::log(static_cast<double>(spec_f.dim()));
  const double s_min = std::log(static_cast<double>(ground_degeneracy(spec_f)));
  if (entropy <= s_min + 1e-14) return kZeroTemperature;
  if (entropy >= s_max - 1e-14) return kInfiniteTemperature;
  return bisect_temperature([&](double T) { return thermal_entropy(spec_f, T); }, entropy,
                            "effective temperature");
}

double effective_temperature(const DensityMatrix& target, const SpectralDecomposition& spec_f) {
  if (target.dim() != spec_f.dim()) throw DimensionError("state and spectrum dimensions differ");
  return temperature_for_entropy(von_neumann_entropy(target), spec_f);
}

double mean_energy_temperature(const DensityMatrix& target, const SpectralDecomposition& spec_f) {
  if (target.dim() != spec_f.dim()) throw DimensionError("state and spectrum dimensions differ");
  // Excitation energies above the ground level keep low-T precision.
  const RealVector excitation = spec_f.eigenvalues.array() - spec_f.eigenvalues(0);
  const double e = target.populations_in(spec_f.eigenvectors).dot(excitation);
  const double e_inf = excitation.mean();
  const double scale = std::max(spec_f.spectral_radius, 1e-300);
  if (e <= 1e-14 * scale) return kZeroTemperature;
  if (e >= e_inf - 1e-14 * scale) return kInfiniteTemperature;
  auto excitation_at = [&](double T) {
    const RealVector w = gibbs_log_weights(spec_f.eigenvalues, T).array().exp();
    return w.dot(excitation) / w.sum();
  };
  return bisect_temperature(excitation_at, e, "mean-energy temperature");
}

double bisect_temperature(const std::function<double(double)>& value_at, double target, const char* what) {
  double lo = 1e-3;
  double hi = 1e3;
  while (value_at(lo) > target && lo > 1e-6) lo /= 10.0;
  while (value_at(hi) < target && hi < 1e6) hi *= 10.0;
  if (value_at(lo) > target || value_at(hi) < target) {
    throw NumericalError(std::string("could not bracket ") + what + " in [1e-6, 1e6]");
  }
  for (int iter = 0; iter < 400 && hi / lo - 1.0 > 4e-16; ++iter) {
    const double mid = std::sqrt(lo * hi);
    if (value_at(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double flo = std::abs(value_at(lo) - target);
  const double fhi = std::abs(value_at(hi) - target);
  return flo <= fhi ? lo : hi;
}

}  // namespace qfric
