#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <utility>

#include "qfric/chain.hpp"

namespace qfric {

inline constexpr double kInfiniteTemperature = std::numeric_limits<double>::infinity();
inline constexpr double kZeroTemperature = 0.0;

enum class StateRole { Generic, Initial, Evolved, Adiabatic, Thermal, DiagonalProjected };

const char* to_string(StateRole role);

// Density matrix held in spectral form rho = W diag(w) W^dagger.
//
// Log-weights are carried alongside the weights. States built from a known
// spectrum (Gibbs states, unitarily evolved or transported states) keep exact
// logarithms, so entropies and relative entropies never take the log of a
// rounded eigenvalue. States built from an arbitrary matrix get numerical
// logarithms and are subject to the 1e-14 clamp in relative entropies.
class DensityMatrix {
 public:
  // Validates Hermiticity, unit trace (1e-10) and positivity (eigenvalues
  // >= -1e-10; values in [-1e-10, 0) are clamped to zero).
  static DensityMatrix from_matrix(const Matrix& m, StateRole role = StateRole::Generic);

  // `basis` must be unitary. `log_weights` are exact logs of `weights`
  // (-inf allowed for zero weights).
  static DensityMatrix from_spectrum(Matrix basis, RealVector weights, RealVector log_weights,
                                     StateRole role);

  // As above with logs taken numerically.
  static DensityMatrix from_spectrum(Matrix basis, RealVector weights, StateRole role);

  Eigen::Index dim() const { return impl_->weights.size(); }
  const Matrix& basis() const { return impl_->basis; }
  const RealVector& weights() const { return impl_->weights; }
  const RealVector& log_weights() const { return impl_->log_weights; }
  bool exact_logs() const { return impl_->exact_logs; }
  StateRole role() const { return impl_->role; }

  // Dense matrix, assembled on first use.
  const Matrix& matrix() const;

  DensityMatrix with_role(StateRole role) const;

  // <v_n| rho |v_n> for every column of `vectors`.
  RealVector populations_in(const Matrix& vectors) const;

 private:
  struct Impl {
    Matrix basis;
    RealVector weights;
    RealVector log_weights;
    bool exact_logs = false;
    StateRole role = StateRole::Generic;
    mutable std::once_flag dense_once;
    mutable Matrix dense;
  };
  explicit DensityMatrix(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct PopulationDistribution {
  RealVector p;  // indexed in the ascending-energy order of a SpectralDecomposition

  void validate() const;
  Eigen::Index size() const { return p.size(); }
};

// Gibbs weights e^{-E_n/T}/Z. T = kInfiniteTemperature gives I/d.
DensityMatrix gibbs_state(const SpectralDecomposition& spec, double T);

// S(gibbs_state(spec, T)) without building the state. Accepts T = 0 (ground
// block entropy) and T = infinity.
double thermal_entropy(const SpectralDecomposition& spec, double T);

// Tr[gibbs_state(spec, T) H]. Accepts T = 0 and T = infinity.
double thermal_energy(const SpectralDecomposition& spec, double T);

double von_neumann_entropy(const DensityMatrix& rho);

// Dephasing onto the eigenspaces of `basis`. Inside a degenerate block the
// restricted state is diagonalized, so the result depends on the eigenspaces
// only. Populations are listed block by block in ascending energy, descending
// inside a block; the returned state's eigenbasis is an eigenbasis of the
// Hamiltonian that `basis` decomposes.
std::pair<DensityMatrix, PopulationDistribution> project_diagonal(const DensityMatrix& rho,
                                                                  const SpectralDecomposition& basis);

double diagonal_entropy(const DensityMatrix& rho, const SpectralDecomposition& basis);

// T with S(gibbs_state(spec_f, T)) = S(target), by bracketing and bisection.
// Returns kZeroTemperature for a pure target and kInfiniteTemperature for a
// maximally mixed one.
double effective_temperature(const DensityMatrix& target, const SpectralDecomposition& spec_f);

// Same root find for a given entropy value.
double temperature_for_entropy(double entropy, const SpectralDecomposition& spec_f);

// Diagnostic: T with Tr[gibbs_state(spec_f, T) H_f] = Tr[target H_f]. Energies
// above the infinite-temperature mean return kInfiniteTemperature.
double mean_energy_temperature(const DensityMatrix& target, const SpectralDecomposition& spec_f);

// Root of value_at(T) = target for a function increasing in T. Bisection in
// log T on [1e-3, 1e3], widened by decades up to [1e-6, 1e6].
double bisect_temperature(const std::function<double(double)>& value_at, double target, const char* what);

}  // namespace qfric
