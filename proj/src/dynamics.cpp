#include "qfric/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <tuple>

#include "qfric/errors.hpp"
#include "qfric/momentum.hpp"

namespace qfric {

namespace {

std::shared_ptr<const MomentumSectors> sectors_for(int n_sites) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const MomentumSectors>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n_sites];
  if (!slot) slot = std::make_shared<const MomentumSectors>(n_sites);
  return slot;
}

double unitarity_defect_of(const Matrix& u) {
  return (u.adjoint() * u - Matrix::Identity(u.cols(), u.cols())).norm();
}

struct BlockRun {
  Matrix u;
  double defect = 0.0;
  bool within_budget = true;
};

// RK4 for dU/dt = (-i A + i h(t) B) U with B = diag(b), in one sector.
BlockRun integrate_block(const Matrix& a, const RealVector& b, const RampProtocol& protocol,
                         double dt, long steps, double budget) {
  const Eigen::Index m = a.rows();
  const Matrix a_scaled = Complex(0.0, -1.0) * a;
  const Eigen::VectorXcd b_scaled = Complex(0.0, 1.0) * b.cast<Complex>();
  const double tau = protocol.duration;
  auto field = [&](double t) { return protocol.h_initial + protocol.delta_h * (t / tau); };
  auto rhs = [&](double t, const Matrix& x, Matrix& out) {
    out.noalias() = a_scaled * x;
    out.noalias() += field(t) * (b_scaled.asDiagonal() * x);
  };

  BlockRun run;
  run.u = Matrix::Identity(m, m);
  Matrix k(m, m), stage(m, m), acc(m, m);
  const long check_every = std::max<long>(1, steps / 64);
  for (long s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    rhs(t, run.u, k);
    acc = k;
    stage = run.u + (0.5 * dt) * k;
    rhs(t + 0.5 * dt, stage, k);
    acc += 2.0 * k;
    stage = run.u + (0.5 * dt) * k;
    rhs(t + 0.5 * dt, stage, k);
    acc += 2.0 * k;
    stage = run.u + dt * k;
    rhs(t + dt, stage, k);
    acc += k;
    run.u += (dt / 6.0) * acc;

    const long done = s + 1;
    if (done % check_every == 0 && done < steps) {
      // The RK4 norm loss grows linearly in the number of steps; abandon a run
      // that is on course to exceed the budget.
      const double projected = unitarity_defect_of(run.u) * static_cast<double>(steps) / done;
      if (projected > budget) {
        run.defect = projected;
        run.within_budget = false;
        return run;
      }
    }
  }
  run.defect = unitarity_defect_of(run.u);
  run.within_budget = run.defect <= budget;
  return run;
}

Matrix nearest_unitary(const Matrix& u) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(u.adjoint() * u);
  if (solver.info() != Eigen::Success) throw NumericalError("polar decomposition failed");
  const RealVector inv_sqrt = solver.eigenvalues().cwiseSqrt().cwiseInverse();
  return u * solver.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() *
         solver.eigenvectors().adjoint();
}

// Greedy maximum-overlap matching: rows are final vectors, columns initial.
std::vector<Eigen::Index> match_by_overlap(const Eigen::MatrixXd& overlap) {
  const Eigen::Index d = overlap.rows();
  constexpr Eigen::Index kCandidates = 16;
  struct Pair {
    double weight;
    Eigen::Index row;
    Eigen::Index col;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(d * std::min(d, kCandidates)));
  std::vector<Eigen::Index> rows(d);
  for (Eigen::Index col = 0; col < d; ++col) {
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    const Eigen::Index keep = std::min(d, kCandidates);
    std::partial_sort(rows.begin(), rows.begin() + keep, rows.end(), [&](Eigen::Index x, Eigen::Index y) {
      if (overlap(x, col) != overlap(y, col)) return overlap(x, col) > overlap(y, col);
      return x < y;
    });
    for (Eigen::Index r = 0; r < keep; ++r) pairs.push_back({overlap(rows[r], col), rows[r], col});
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (x.weight != y.weight) return x.weight > y.weight;
    if (x.row != y.row) return x.row < y.row;
    return x.col < y.col;
  });
  std::vector<Eigen::Index> row_to_col(d, -1);
  std::vector<bool> col_used(d, false);
  for (const auto& p : pairs) {
    if (row_to_col[p.row] < 0 && !col_used[p.col]) {
      row_to_col[p.row] = p.col;
      col_used[p.col] = true;
    }
  }
  // Leftovers: best remaining column for each unmatched row, in row order.
  for (Eigen::Index row = 0; row < d; ++row) {
    if (row_to_col[row] >= 0) continue;
    Eigen::Index best = -1;
    for (Eigen::Index col = 0; col < d; ++col) {
      if (!col_used[col] && (best < 0 || overlap(row, col) > overlap(row, best))) best = col;
    }
    row_to_col[row] = best;
    col_used[best] = true;
  }
  return row_to_col;
}

}  // namespace

void RampProtocol::validate() const {
  if (!std::isfinite(h_initial) || !std::isfinite(delta_h)) {
    throw DomainError("ramp endpoints must be finite");
  }
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw DomainError("ramp duration must be finite and >= 0");
  }
}

void EvolutionConfig::validate() const {
  if (step_dt && !(*step_dt > 0.0)) throw DomainError("step_dt must be positive");
  if (!(unitarity_tol >= 1e-12)) throw DomainError("unitarity_tol must be >= 1e-12");
  if (adiabatic_tau && !(*adiabatic_tau > 0.0)) throw DomainError("adiabatic_tau must be positive");
  if (max_halvings < 0) throw DomainError("max_halvings must be >= 0");
}

double EvolutionConfig::step_for(double tau, double coupling) const {
  if (step_dt) return *step_dt;
  return std::min(1e-3 / coupling, tau / 1000.0);
}

double EvolutionConfig::adiabatic_duration(double coupling) const {
  return adiabatic_tau ? *adiabatic_tau : 100.0 / coupling;
}

Propagator::Propagator(Matrix u, double step_dt, long steps, int halvings, double raw_defect)
    : u_(std::move(u)), step_dt_(step_dt), steps_(steps), halvings_(halvings), raw_defect_(raw_defect) {
  if (u_.rows() != u_.cols()) throw DimensionError("propagator must be square");
}

double Propagator::unitarity_defect() const { return unitarity_defect_of(u_); }

double ramp_value(const RampProtocol& protocol, double t) {
  protocol.validate();
  if (t < 0.0 || t > protocol.duration) {
    throw DomainError("time " + std::to_string(t) + " outside [0, " +
                      std::to_string(protocol.duration) + "]");
  }
  if (protocol.duration == 0.0) return protocol.h_initial;
  if (t == protocol.duration) return protocol.h_final();
  return protocol.h_initial + (t / protocol.duration) * protocol.delta_h;
}

Propagator evolve_propagator(const ChainParams& params, const RampProtocol& protocol,
                             const EvolutionConfig& cfg) {
  params.validate();
  protocol.validate();
  cfg.validate();
  const Eigen::Index d = params.dim();
  if (protocol.duration == 0.0) return Propagator(Matrix::Identity(d, d), 0.0, 0, 0, 0.0);

  const Matrix a = build_hamiltonian(params, 0.0).matrix();
  const Matrix b = a - build_hamiltonian(params, 1.0).matrix();  // sum_j Z_j
  const auto sectors = sectors_for(params.n_sites);
  std::vector<Matrix> a_blocks(sectors->n_blocks());
  std::vector<RealVector> b_blocks(sectors->n_blocks());
  for (int k = 0; k < sectors->n_blocks(); ++k) {
    if (sectors->mirror_of(k) >= 0) continue;
    a_blocks[k] = sectors->restrict(a, k);
    // sum_j Z_j is diagonal in the symmetry basis.
    b_blocks[k] = sectors->restrict(b, k).diagonal().real();
  }

  const double tau = protocol.duration;
  const double budget = cfg.unitarity_tol * static_cast<double>(d);
  double target_dt = cfg.step_for(tau, params.coupling);
  double last_defect = 0.0;
  for (int halving = 0; halving <= cfg.max_halvings; ++halving, target_dt *= 0.5) {
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(tau / target_dt - 1e-9)));
    const double dt = tau / static_cast<double>(steps);
    std::vector<Matrix> blocks(sectors->n_blocks());
    double defect_sq = 0.0;
    bool ok = true;
    for (int k = 0; k < sectors->n_blocks() && ok; ++k) {
      const int mirror = sectors->mirror_of(k);
      if (mirror >= 0) {
        blocks[k] = blocks[mirror];
        defect_sq += std::pow(unitarity_defect_of(blocks[k]), 2);
        continue;
      }
      BlockRun run = integrate_block(a_blocks[k], b_blocks[k], protocol, dt, steps, budget);
      defect_sq += run.defect * run.defect;
      ok = run.within_budget && std::sqrt(defect_sq) <= budget;
      blocks[k] = std::move(run.u);
    }
    last_defect = std::sqrt(defect_sq);
    if (!ok) continue;
    for (auto& blk : blocks) blk = nearest_unitary(blk);
    return Propagator(sectors->assemble(blocks), dt, steps, halving, last_defect);
  }
  throw NumericalError("integrator-step error: unitarity defect " + std::to_string(last_defect) +
                       " exceeds " + std::to_string(budget) + " after " +
                       std::to_string(cfg.max_halvings) + " step halvings");
}

DensityMatrix evolve_state(const DensityMatrix& rho_i, const Propagator& u) {
  if (rho_i.dim() != u.dim()) throw DimensionError("state and propagator dimensions differ");
  Matrix basis = u.matrix() * rho_i.basis();
  if (rho_i.exact_logs()) {
    return DensityMatrix::from_spectrum(std::move(basis), rho_i.weights(), rho_i.log_weights(),
                                        StateRole::Evolved);
  }
  return DensityMatrix::from_spectrum(std::move(basis), rho_i.weights(), StateRole::Evolved);
}

AdiabaticState adiabatic_state(const DensityMatrix& rho_i, const Propagator& long_ramp,
                               const SpectralDecomposition& spec_f) {
  if (rho_i.dim() != long_ramp.dim() || rho_i.dim() != spec_f.dim()) {
    throw DimensionError("adiabatic reference inputs have inconsistent dimensions");
  }
  const DensityMatrix evolved = evolve_state(rho_i, long_ramp);
  auto [dephased, dephased_pops] = project_diagonal(evolved, spec_f);

  const Matrix& final_vectors = dephased.basis();
  const Eigen::MatrixXd overlap = (final_vectors.adjoint() * evolved.basis()).cwiseAbs2();
  const std::vector<Eigen::Index> source = match_by_overlap(overlap);

  const Eigen::Index d = rho_i.dim();
  RealVector weights(d), logs(d);
  AdiabaticState out{rho_i, 0.0, 0.0, 0};
  double tv = 0.0;
  for (Eigen::Index n = 0; n < d; ++n) {
    weights(n) = rho_i.weights()(source[n]);
    logs(n) = rho_i.log_weights()(source[n]);
    tv += std::abs(dephased_pops.p(n) - weights(n));
    if (source[n] != n) ++out.reordered_levels;
  }
  out.transport_distance = 0.5 * tv;
  out.dephasing_entropy_excess = von_neumann_entropy(dephased) - von_neumann_entropy(rho_i);
  out.state = rho_i.exact_logs()
                  ? DensityMatrix::from_spectrum(final_vectors, std::move(weights), std::move(logs),
                                                 StateRole::Adiabatic)
                  : DensityMatrix::from_spectrum(final_vectors, std::move(weights), StateRole::Adiabatic);
  return out;
}

AdiabaticState adiabatic_state(const DensityMatrix& rho_i, const ChainParams& params,
                               const RampProtocol& protocol, const EvolutionConfig& cfg) {
  const RampProtocol slow = protocol.with_duration(cfg.adiabatic_duration(params.coupling));
  const Propagator u = evolve_propagator(params, slow, cfg);
  const SpectralDecomposition spec_f = diagonalize(build_hamiltonian(params, protocol.h_final()));
  return adiabatic_state(rho_i, u, spec_f);
}

RealVector sorted_transport_populations(const DensityMatrix& rho_i, const SpectralDecomposition& spec_i,
                                        const SpectralDecomposition& spec_f) {
  if (rho_i.dim() != spec_i.dim() || spec_i.dim() != spec_f.dim()) {
    throw DimensionError("sorted transport inputs have inconsistent dimensions");
  }
  return rho_i.populations_in(spec_i.eigenvectors);
}

}  // namespace qfric
