#include "qfric/observables.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qfric/errors.hpp"

namespace qfric {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kEigenClamp = 1e-14;
constexpr double kSupportTol = 1e-8;

// Frobenius mass of M = V^dagger rho V outside the degenerate blocks of spec.
double off_block_mass(const DensityMatrix& rho, const SpectralDecomposition& spec) {
  const Matrix c = spec.eigenvectors.adjoint() * rho.basis();
  Matrix m = c * rho.weights().cast<Complex>().asDiagonal() * c.adjoint();
  for (const auto& b : spec.blocks) m.block(b.begin, b.begin, b.size(), b.size()).setZero();
  return m.norm();
}

}  // namespace

double energy(const DensityMatrix& rho, const HermitianOperator& h) {
  if (rho.dim() != h.dim()) throw DimensionError("state and Hamiltonian dimensions differ");
  return rho.matrix().cwiseProduct(h.matrix().transpose()).sum().real();
}

double energy(const DensityMatrix& rho, const SpectralDecomposition& spec) {
  if (rho.dim() != spec.dim()) throw DimensionError("state and spectrum dimensions differ");
  return rho.populations_in(spec.eigenvectors).dot(spec.eigenvalues);
}

double work(const DensityMatrix& rho_i, const HermitianOperator& h_i, const DensityMatrix& rho_f,
            const HermitianOperator& h_f) {
  if (rho_i.dim() != rho_f.dim() || h_i.dim() != h_f.dim()) {
    throw DimensionError("work inputs have inconsistent dimensions");
  }
  return energy(rho_f, h_f) - energy(rho_i, h_i);
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("relative entropy of states with different dimensions");
  const double neg_entropy = -von_neumann_entropy(rho);
  const RealVector pops = rho.populations_in(sigma.basis());
  const RealVector& lam = sigma.weights();
  const RealVector& logs = sigma.log_weights();
  double cross = 0.0;
  double null_weight = 0.0;
  for (Eigen::Index n = 0; n < pops.size(); ++n) {
    double log_sigma = logs(n);
    const bool null_direction =
        sigma.exact_logs() ? !std::isfinite(log_sigma) : !(lam(n) > kEigenClamp);
    if (null_direction) {
      null_weight += pops(n);
      log_sigma = std::log(kEigenClamp);
    }
    cross += pops(n) * log_sigma;
  }
  if (null_weight > kSupportTol) return kInf;
  return neg_entropy - cross;
}

double free_energy(const DensityMatrix& rho, const SpectralDecomposition& spec_f, double T) {
  return energy(rho, spec_f) - T * von_neumann_entropy(rho);
}

std::vector<std::string> FrictionReport::violations() const {
  std::vector<std::string> out;
  if (!(W_fric >= -1e-8)) out.emplace_back("W_fric>=-1e-8");
  if (!support_violation) {
    if (!(std::abs(D_tau_A - (delta_S_d + D_diag_A)) <= 1e-8)) out.emplace_back("D_tau_A=dSd+D_diag_A");
    if (!(D_tau_A >= -1e-10)) out.emplace_back("D_tau_A>=0");
    if (!(D_diag_A >= -1e-10)) out.emplace_back("D_diag_A>=0");
  }
  return out;
}

FrictionReport friction_report(const DensityMatrix& rho_i, const DensityMatrix& rho_tau,
                               const DensityMatrix& rho_A, const SpectralDecomposition& spec_f,
                               const HermitianOperator& h_i) {
  const Eigen::Index d = spec_f.dim();
  if (rho_i.dim() != d || rho_tau.dim() != d || rho_A.dim() != d || h_i.dim() != d) {
    throw DimensionError("friction report inputs have inconsistent dimensions");
  }
  const double leak = off_block_mass(rho_A, spec_f);
  if (leak > 1e-8) {
    throw DomainError("adiabatic state is not diagonal in the final eigenbasis (off-diagonal mass " +
                      std::to_string(leak) + ")");
  }

  FrictionReport r;
  const double e_i = energy(rho_i, h_i);
  const double e_tau = energy(rho_tau, spec_f);
  const double e_A = energy(rho_A, spec_f);
  r.W_tau = e_tau - e_i;
  r.W_A = e_A - e_i;
  r.W_fric = r.W_tau - r.W_A;

  const DensityMatrix tau_diag = project_diagonal(rho_tau, spec_f).first;
  const double s_diag = von_neumann_entropy(tau_diag);
  const double s_d_adiabatic = diagonal_entropy(rho_A, spec_f);
  r.delta_S_d = s_diag - s_d_adiabatic;

  r.T_A = effective_temperature(rho_A, spec_f);
  r.T_A_delta_S_d = r.T_A * r.delta_S_d;
  r.D_tau_A = relative_entropy(rho_tau, rho_A);
  r.D_diag_A = relative_entropy(tau_diag, rho_A);

  if (r.T_A > 0.0) {
    const DensityMatrix thermal = gibbs_state(spec_f, r.T_A);
    const double d_tau_T = relative_entropy(rho_tau, thermal);
    const double d_A_T = relative_entropy(rho_A, thermal);
    r.delta = d_tau_T - r.D_tau_A - d_A_T;
  } else {
    r.delta = kNaN;
  }
  if (std::isfinite(r.T_A)) {
    r.F_terms.diagonal = e_tau - r.T_A * s_diag;
    r.F_terms.adiabatic = e_A - r.T_A * von_neumann_entropy(rho_A);
  } else {
    r.F_terms = {kNaN, kNaN};
  }
  r.W_opt = optimal_work(rho_i, h_i, spec_f, r.T_A);
  r.T_mean_energy = mean_energy_temperature(rho_A, spec_f);
  r.support_violation = std::isinf(r.D_tau_A) || std::isinf(r.D_diag_A) ||
                        (std::isnan(r.delta) && r.T_A > 0.0) || std::isinf(r.delta);
  return r;
}

std::vector<double> cumulative_friction(const PopulationDistribution& pops_tau,
                                        const PopulationDistribution& pops_A,
                                        const SpectralDecomposition& spec_f) {
  if (pops_tau.size() != pops_A.size() || pops_tau.size() != spec_f.dim()) {
    throw DimensionError("cumulative friction inputs have different lengths");
  }
  std::vector<double> out(static_cast<std::size_t>(spec_f.dim()));
  double running = 0.0;
  for (Eigen::Index k = 0; k < spec_f.dim(); ++k) {
    running += (pops_tau.p(k) - pops_A.p(k)) * spec_f.eigenvalues(k);
    out[static_cast<std::size_t>(k)] = running;
  }
  return out;
}

double optimal_work(const DensityMatrix& rho_i, const HermitianOperator& h_i,
                    const SpectralDecomposition& spec_f, double T_A) {
  if (rho_i.dim() != h_i.dim() || h_i.dim() != spec_f.dim()) {
    throw DimensionError("optimal work inputs have inconsistent dimensions");
  }
  if (std::isnan(T_A) || T_A < 0.0) throw DomainError("T_A must be >= 0");
  return thermal_energy(spec_f, T_A) - energy(rho_i, h_i);
}

double IdentityResiduals::max_abs() const {
  return std::max({std::abs(relative_entropy_split), std::abs(free_energy_split),
                   std::abs(thermal_reference_split)});
}

IdentityResiduals identity_residuals(const DensityMatrix& rho_tau, const DensityMatrix& rho_A,
                                     const SpectralDecomposition& spec_f, const FrictionReport& report,
                                     double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("identity residuals need 0 < T < infinity");
  IdentityResiduals out;
  out.T = T;
  out.relative_entropy_split = report.D_tau_A - (report.delta_S_d + report.D_diag_A);

  const DensityMatrix tau_diag = project_diagonal(rho_tau, spec_f).first;
  const double f_diag = free_energy(tau_diag, spec_f, T);
  const double f_A = free_energy(rho_A, spec_f, T);
  out.free_energy_split = report.W_fric - (T * report.delta_S_d + f_diag - f_A);

  const DensityMatrix thermal = gibbs_state(spec_f, T);
  out.thermal_reference_split =
      report.W_fric - T * (relative_entropy(rho_tau, thermal) - relative_entropy(rho_A, thermal));
  return out;
}

double two_level_friction(const PopulationDistribution& pops_tau, const PopulationDistribution& pops_A,
                          const SpectralDecomposition& spec_f) {
  if (pops_tau.size() != pops_A.size() || pops_tau.size() != spec_f.dim()) {
    throw DimensionError("two-level friction inputs have different lengths");
  }
  if (spec_f.blocks.size() < 2) return 0.0;
  const double e0 = spec_f.eigenvalues(0);
  double w = 0.0;
  for (std::size_t b = 0; b < 2; ++b) {
    for (Eigen::Index k = spec_f.blocks[b].begin; k < spec_f.blocks[b].end; ++k) {
      w += (pops_tau.p(k) - pops_A.p(k)) * (spec_f.eigenvalues(k) - e0);
    }
  }
  return w;
}

}  // namespace qfric
