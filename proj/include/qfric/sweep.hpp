#pragma once

#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "qfric/chain.hpp"
#include "qfric/dynamics.hpp"
#include "qfric/free_fermion.hpp"
#include "qfric/observables.hpp"
#include "qfric/thermal.hpp"

namespace qfric {

inline constexpr const char* kVersionTag = "qfric 0.1.0";

enum class SweepAxis { Tau, T_i, DeltaH, L, N };
enum class Solver { Exact, FreeFermion };

const char* to_string(SweepAxis axis);
const char* to_string(Solver solver);
SweepAxis parse_axis(const std::string& name);
Solver parse_solver(const std::string& name);

// One parameter point.
struct PointSpec {
  ChainParams chain;
  RampProtocol protocol;
  double T_i = 3.0;
  EvolutionConfig evolution;

  void validate() const;
};

struct SweepSpec {
  PointSpec base;
  SweepAxis axis = SweepAxis::Tau;
  std::vector<double> grid;
  Solver solver = Solver::Exact;
  // Hold dh / (g^2 tau) at this value: a tau axis sets dh, a dh axis sets tau.
  std::optional<double> fixed_nonadiabaticity;
  // 0: one per hardware thread.
  int workers = 0;

  void validate() const;
  PointSpec point(std::size_t i) const;
  // Stable key=value serialization of everything that affects results.
  std::string canonical() const;
  // SHA-256 of canonical() and the version tag, hex encoded.
  std::string config_hash() const;
};

struct RowDiagnostics {
  double identity_residual = 0.0;  // max over T in {T_A, 2 T_A}
  double unitarity_defect = 0.0;   // raw integrator defect of the finite-tau run
  int step_halvings = 0;
  double dephasing_entropy_excess = 0.0;
  double transport_distance = 0.0;
  int reordered_levels = 0;
  double two_level_friction = 0.0;
  double mode_TA_dSd = 0.0;  // free-fermion solver only
};

struct SweepRow {
  double axis_value = 0.0;
  FrictionReport report;
  RowDiagnostics diagnostics;
  std::string error;  // empty for a computed row

  bool flagged() const { return !error.empty() || report.support_violation || !report.violations().empty(); }
};

struct SweepResult {
  SweepAxis axis = SweepAxis::Tau;
  Solver solver = Solver::Exact;
  double coupling = 1.0;
  std::vector<SweepRow> rows;
  std::string config_hash;
  std::string version = kVersionTag;
};

// Shared H_i/H_f decompositions and long-ramp propagators. Concurrent readers;
// the first caller for a key computes it, later callers wait for it.
class SweepCache {
 public:
  struct Hamiltonian {
    HermitianOperator op;
    SpectralDecomposition spec;
  };

  std::shared_ptr<const Hamiltonian> hamiltonian(const ChainParams& chain, double h);
  std::shared_ptr<const Propagator> long_ramp(const ChainParams& chain, const RampProtocol& protocol,
                                              const EvolutionConfig& cfg);

  std::size_t hamiltonian_entries() const;
  std::size_t propagator_entries() const;

 private:
  using HKey = std::tuple<int, double, double, int, double>;
  using PKey = std::tuple<int, double, double, int, double, double, double, std::optional<double>, double, int>;
  mutable std::mutex mutex_;
  std::map<HKey, std::shared_future<std::shared_ptr<const Hamiltonian>>> hamiltonians_;
  std::map<PKey, std::shared_future<std::shared_ptr<const Propagator>>> propagators_;
};

// Everything computed at one exact-diagonalization point.
struct PointResult {
  std::shared_ptr<const SweepCache::Hamiltonian> initial;
  std::shared_ptr<const SweepCache::Hamiltonian> final;
  DensityMatrix rho_i;
  DensityMatrix rho_tau;
  AdiabaticState adiabatic;
  FrictionReport report;
  RowDiagnostics diagnostics;
};

PointResult evaluate_point(const PointSpec& point, SweepCache& cache);

// Free-fermion point mapped onto the report columns. D_tau_A and D_diag_A are
// pair-weighted mode sums; delta, F_terms and T_mean_energy are NaN.
SweepRow evaluate_free_fermion_point(const PointSpec& point);

SweepResult run_sweep(const SweepSpec& spec, SweepCache* cache = nullptr);

}  // namespace qfric
