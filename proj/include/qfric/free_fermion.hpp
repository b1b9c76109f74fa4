#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qfric/chain.hpp"
#include "qfric/dynamics.hpp"

namespace qfric {

using ModeMatrix = Eigen::Matrix2cd;

struct ModeSpec {
  int index = 1;  // j = 1..N
  double theta = 0.0;  // (2j - 1) pi / N
  double omega_i = 0.0;
  double omega_f = 0.0;
  // theta = pi (odd N): the mode has no partner at -theta and is a single
  // fermion with levels +-omega/2.
  bool self_paired = false;
};

struct ModeState {
  ModeMatrix rho;

  void validate() const;
};

struct ModeReport {
  ModeSpec spec;
  // Contribution of this fermion to chain-level sums: half the probability that
  // its (theta, -theta) pair sits in the empty/doubly-occupied subspace. The
  // singly occupied pair states do not evolve. Self-paired modes weigh 1.
  double weight = 0.0;
  double T_A_j = 0.0;
  double W_fric_j = 0.0;
  double delta_S_d_j = 0.0;
  double D_j = 0.0;       // D(rho_tau^j || rho_A^j)
  double D_diag_j = 0.0;  // D(rho_tau^j,diag || rho_A^j)
};

struct IntegrableReport {
  double W_tau = 0.0;
  double W_A = 0.0;
  double W_fric = 0.0;
  // sum_j weight_j T_A^j dS_d^j and the remainder W_fric minus that sum.
  double mode_TA_dSd = 0.0;
  double mode_remainder = 0.0;
  // Single-temperature description: T_A from the entropy of the factorized
  // free-fermion state.
  double T_A = 0.0;
  double delta_S_d = 0.0;
  double T_A_delta_S_d = 0.0;
  double W_opt = 0.0;
  std::vector<ModeReport> modes;
};

// omega = 2 sqrt(h^2 + g^2 - 2 g h cos(theta)).
double dispersion(double coupling, double h, double theta);

// Requires params.longitudinal == 0. n_sites is not limited by max_sites.
std::vector<ModeSpec> mode_spectrum(const ChainParams& params, double h);
std::vector<ModeSpec> mode_spectrum(const ChainParams& params, const RampProtocol& protocol);

// E_0 = -1/2 sum_j omega_j, using omega_i.
double ground_energy(std::span<const ModeSpec> modes);

// E_0 + sum_{j in S} omega_j over even-size subsets S, ascending. At most 20 modes.
RealVector even_parity_spectrum(std::span<const ModeSpec> modes);

// [[eps, Delta], [Delta, -eps]], eps = 2(h - g cos theta), Delta = 2 g sin theta
// (halved for a self-paired mode).
ModeMatrix mode_hamiltonian(const ModeSpec& spec, double coupling, double h);

// Initial state: Gibbs in the H_j(h_i) eigenbasis at T_i. rho_tau^j from RK4
// with the same step rule and unitarity handling as evolve_propagator; rho_A^j
// carries the initial populations onto the H_j(h_f) eigenbasis.
std::pair<ModeState, ModeState> mode_evolve(const ModeSpec& spec, double coupling,
                                            const RampProtocol& protocol, double T_i,
                                            const EvolutionConfig& cfg = {});

// T_i omega_f / omega_i; NaN when omega_i == 0.
double mode_temperature(const ModeSpec& spec, double T_i);

IntegrableReport integrable_friction(const ChainParams& params, const RampProtocol& protocol, double T_i,
                                     const EvolutionConfig& cfg = {});

}  // namespace qfric
