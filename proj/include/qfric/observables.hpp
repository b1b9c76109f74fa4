#pragma once

#include <string>
#include <vector>

#include "qfric/chain.hpp"
#include "qfric/thermal.hpp"

namespace qfric {

// Tr[rho H].
double energy(const DensityMatrix& rho, const HermitianOperator& h);
// Tr[rho H] with H given by its spectral decomposition.
double energy(const DensityMatrix& rho, const SpectralDecomposition& spec);

// Tr[rho_f H_f] - Tr[rho_i H_i].
double work(const DensityMatrix& rho_i, const HermitianOperator& h_i, const DensityMatrix& rho_f,
            const HermitianOperator& h_f);

// D(rho||sigma) = Tr[rho ln rho] - Tr[rho ln sigma], in nats. Returns +infinity
// when rho puts more than 1e-8 weight on the null space of sigma. Numerically
// obtained eigenvalues of sigma are clamped at 1e-14 before the log.
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

// F_T(rho) = Tr[rho H_f] - T S(rho).
double free_energy(const DensityMatrix& rho, const SpectralDecomposition& spec_f, double T);

struct FreeEnergyPair {
  double diagonal = 0.0;   // F_{T_A}(rho_tau^diag)
  double adiabatic = 0.0;  // F_{T_A}(rho_A)
};

struct FrictionReport {
  double W_tau = 0.0;
  double W_A = 0.0;
  double W_fric = 0.0;
  double T_A = 0.0;
  double delta_S_d = 0.0;
  double T_A_delta_S_d = 0.0;
  double D_tau_A = 0.0;
  double D_diag_A = 0.0;
  double delta = 0.0;
  FreeEnergyPair F_terms;
  double W_opt = 0.0;
  double T_mean_energy = 0.0;
  // Set when a relative entropy hit the off-support sentinel.
  bool support_violation = false;

  // Names of the report invariants that do not hold.
  std::vector<std::string> violations() const;
};

// Everything derived from one finite-time run and its adiabatic reference.
// `rho_A` must be diagonal in the eigenspaces of spec_f.
FrictionReport friction_report(const DensityMatrix& rho_i, const DensityMatrix& rho_tau,
                               const DensityMatrix& rho_A, const SpectralDecomposition& spec_f,
                               const HermitianOperator& h_i);

// <w>^n_fric = sum_{k<=n} [p_k(rho_tau) - p_k(rho_A)] E_k^f for n = 1..d.
std::vector<double> cumulative_friction(const PopulationDistribution& pops_tau,
                                        const PopulationDistribution& pops_A,
                                        const SpectralDecomposition& spec_f);

// Tr[rho_{T_A}^therm H_f] - Tr[rho_i H_i]. T_A may be a 0 or infinity sentinel.
double optimal_work(const DensityMatrix& rho_i, const HermitianOperator& h_i,
                    const SpectralDecomposition& spec_f, double T_A);

// Residuals of the exact decompositions of the frictional work at temperature T.
struct IdentityResiduals {
  double T = 0.0;
  // D(rho_tau||rho_A) - [dS_d + D(rho_tau^diag||rho_A)]
  double relative_entropy_split = 0.0;
  // W_fric - [T dS_d + F_T(rho_tau^diag) - F_T(rho_A)]
  double free_energy_split = 0.0;
  // W_fric - T [D(rho_tau||rho_T) - D(rho_A||rho_T)]
  double thermal_reference_split = 0.0;

  double max_abs() const;
};

IdentityResiduals identity_residuals(const DensityMatrix& rho_tau, const DensityMatrix& rho_A,
                                     const SpectralDecomposition& spec_f, const FrictionReport& report,
                                     double T);

// Frictional work carried by the ground level and the first excited level
// (the degenerate block above the ground block), measured from the ground
// energy: sum over those levels of [p_k(rho_tau) - p_k(rho_A)] (E_k - E_0).
double two_level_friction(const PopulationDistribution& pops_tau, const PopulationDistribution& pops_A,
                          const SpectralDecomposition& spec_f);

}  // namespace qfric
