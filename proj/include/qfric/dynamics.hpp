#pragma once

#include <optional>

#include "qfric/chain.hpp"
#include "qfric/thermal.hpp"

namespace qfric {

enum class RampShape { Linear };

struct RampProtocol {
  double h_initial = 1.5;
  double delta_h = 2.0;  // h_f - h_i
  double duration = 1.0;  // tau; 0 is a sudden quench
  RampShape shape = RampShape::Linear;

  double h_final() const { return h_initial + delta_h; }
  void validate() const;
  RampProtocol with_duration(double tau) const {
    RampProtocol p = *this;
    p.duration = tau;
    return p;
  }
};

struct EvolutionConfig {
  // Unset: min(1e-3/g, tau/1000).
  std::optional<double> step_dt;
  double unitarity_tol = 1e-9;
  // Unset: 100/g.
  std::optional<double> adiabatic_tau;
  int max_halvings = 4;

  void validate() const;
  double step_for(double tau, double coupling) const;
  double adiabatic_duration(double coupling) const;
};

// U(tau) for dU/dt = -i H(h(t)) U, U(0) = I.
class Propagator {
 public:
  Propagator(Matrix u, double step_dt, long steps, int halvings, double raw_defect);

  const Matrix& matrix() const { return u_; }
  Eigen::Index dim() const { return u_.rows(); }

  double step_dt() const { return step_dt_; }
  long steps() const { return steps_; }
  int halvings() const { return halvings_; }
  // ||U^dagger U - I||_F of the integrator output before it was projected
  // back onto the unitary group.
  double raw_unitarity_defect() const { return raw_defect_; }
  double unitarity_defect() const;

 private:
  Matrix u_;
  double step_dt_;
  long steps_;
  int halvings_;
  double raw_defect_;
};

double ramp_value(const RampProtocol& protocol, double t);

// Classical fourth-order Runge-Kutta with a fixed step, run independently in
// each translation-momentum sector. A run whose unitarity defect exceeds
// unitarity_tol * dim is repeated with half the step (at most max_halvings
// times, otherwise NumericalError). The accepted result is replaced by its
// nearest unitary (polar factor).
Propagator evolve_propagator(const ChainParams& params, const RampProtocol& protocol,
                             const EvolutionConfig& cfg);

DensityMatrix evolve_state(const DensityMatrix& rho_i, const Propagator& u);

struct AdiabaticState {
  DensityMatrix state;
  // S of the dephased long-ramp state minus S(rho_i).
  double dephasing_entropy_excess = 0.0;
  // Total-variation distance between the dephased long-ramp populations and
  // the transported populations carried by `state`.
  double transport_distance = 0.0;
  // Final levels whose transported population does not come from the initial
  // level of the same rank (level crossings).
  int reordered_levels = 0;
};

// Long-ramp reference: evolve rho_i over the adiabatic duration, dephase in the
// H_f eigenbasis, then assign each final eigenvector the initial eigenvalue of
// rho_i whose evolved eigenvector it overlaps most. The result is diagonal in
// the H_f eigenbasis and isospectral with rho_i.
AdiabaticState adiabatic_state(const DensityMatrix& rho_i, const Propagator& long_ramp,
                               const SpectralDecomposition& spec_f);

AdiabaticState adiabatic_state(const DensityMatrix& rho_i, const ChainParams& params,
                               const RampProtocol& protocol, const EvolutionConfig& cfg);

// Diagnostic cross-check: populations of rho_i (in spec_i order) carried to the
// levels of spec_f with the same rank.
RealVector sorted_transport_populations(const DensityMatrix& rho_i, const SpectralDecomposition& spec_i,
                                        const SpectralDecomposition& spec_f);

}  // namespace qfric
