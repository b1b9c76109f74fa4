#include "qfric/sweep.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>
#include <type_traits>
#include <utility>

#include "qfric/errors.hpp"

namespace qfric {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string exact_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

FrictionReport nan_report() {
  FrictionReport r;
  r.W_tau = r.W_A = r.W_fric = r.T_A = r.delta_S_d = r.T_A_delta_S_d = kNaN;
  r.D_tau_A = r.D_diag_A = r.delta = r.W_opt = r.T_mean_energy = kNaN;
  r.F_terms = {kNaN, kNaN};
  return r;
}

RowDiagnostics nan_diagnostics() {
  RowDiagnostics d;
  d.identity_residual = d.unitarity_defect = d.dephasing_entropy_excess = kNaN;
  d.transport_distance = d.two_level_friction = d.mode_TA_dSd = kNaN;
  return d;
}

template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                    : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

template <typename Map, typename Key, typename Make>
auto get_or_compute(std::mutex& mutex, Map& map, const Key& key, Make&& make) {
  using Ptr = std::decay_t<decltype(std::declval<typename Map::mapped_type>().get())>;
  std::promise<Ptr> promise;
  std::shared_future<Ptr> pending;
  {
    std::lock_guard lock(mutex);
    auto it = map.find(key);
    if (it != map.end()) {
      pending = it->second;
    } else {
      map.emplace(key, promise.get_future().share());
    }
  }
  if (pending.valid()) return pending.get();
  try {
    Ptr value = make();
    promise.set_value(value);
    return value;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(mutex);
    map.erase(key);
    throw;
  }
}

}  // namespace

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Tau:
      return "tau";
    case SweepAxis::T_i:
      return "T_i";
    case SweepAxis::DeltaH:
      return "dh";
    case SweepAxis::L:
      return "L";
    case SweepAxis::N:
      return "n";
  }
  return "unknown";
}

const char* to_string(Solver solver) { return solver == Solver::Exact ? "exact" : "free-fermion"; }

SweepAxis parse_axis(const std::string& name) {
  for (auto axis : {SweepAxis::Tau, SweepAxis::T_i, SweepAxis::DeltaH, SweepAxis::L, SweepAxis::N}) {
    if (name == to_string(axis)) return axis;
  }
  throw ConfigError("unknown axis '" + name + "' (expected tau, T_i, dh, L or n)");
}

Solver parse_solver(const std::string& name) {
  if (name == "exact") return Solver::Exact;
  if (name == "free-fermion") return Solver::FreeFermion;
  throw ConfigError("unknown solver '" + name + "' (expected exact or free-fermion)");
}

void PointSpec::validate() const {
  protocol.validate();
  evolution.validate();
  if (std::isnan(T_i) || !(T_i > 0.0)) throw DomainError("T_i must be > 0");
}

void SweepSpec::validate() const {
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  for (double v : grid) {
    if (!std::isfinite(v)) throw ConfigError("sweep grid contains a non-finite value");
  }
  const bool up = grid.size() < 2 || grid[1] > grid[0];
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (up ? !(grid[i] > grid[i - 1]) : !(grid[i] < grid[i - 1])) {
      throw ConfigError("sweep grid must be strictly monotone");
    }
  }
  if (fixed_nonadiabaticity) {
    if (axis != SweepAxis::Tau && axis != SweepAxis::DeltaH) {
      throw ConfigError("the dh/(g^2 tau) constraint needs a tau or dh axis");
    }
    if (!(*fixed_nonadiabaticity > 0.0)) throw ConfigError("dh/(g^2 tau) must be positive");
  }
  if (axis == SweepAxis::N) {
    for (double v : grid) {
      if (v != std::round(v) || v < 1) throw ConfigError("n axis values must be positive integers");
    }
  }
  if (workers < 0) throw ConfigError("workers must be >= 0");
  try {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const PointSpec p = point(i);
      p.validate();
      if (solver == Solver::Exact) p.chain.validate();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

PointSpec SweepSpec::point(std::size_t i) const {
  PointSpec p = base;
  const double v = grid.at(i);
  const double g2 = base.chain.coupling * base.chain.coupling;
  switch (axis) {
    case SweepAxis::Tau:
      p.protocol.duration = v;
      if (fixed_nonadiabaticity) p.protocol.delta_h = *fixed_nonadiabaticity * g2 * v;
      break;
    case SweepAxis::T_i:
      p.T_i = v;
      break;
    case SweepAxis::DeltaH:
      p.protocol.delta_h = v;
      if (fixed_nonadiabaticity) p.protocol.duration = v / (*fixed_nonadiabaticity * g2);
      break;
    case SweepAxis::L:
      p.chain.longitudinal = v;
      break;
    case SweepAxis::N:
      p.chain.n_sites = static_cast<int>(v);
      break;
  }
  return p;
}

std::string SweepSpec::canonical() const {
  const auto& c = base.chain;
  const auto& e = base.evolution;
  std::string s;
  auto put = [&](const char* key, const std::string& value) {
    s += key;
    s += '=';
    s += value;
    s += '\n';
  };
  put("version", kVersionTag);
  put("solver", to_string(solver));
  put("axis", to_string(axis));
  put("n", std::to_string(c.n_sites));
  put("max_sites", std::to_string(c.max_sites));
  put("g", exact_number(c.coupling));
  put("L", exact_number(c.longitudinal));
  put("h_i", exact_number(base.protocol.h_initial));
  put("dh", exact_number(base.protocol.delta_h));
  put("tau", exact_number(base.protocol.duration));
  put("shape", "linear");
  put("T_i", exact_number(base.T_i));
  put("adiabatic_tau", exact_number(e.adiabatic_duration(c.coupling)));
  put("step_dt", e.step_dt ? exact_number(*e.step_dt) : "auto");
  put("unitarity_tol", exact_number(e.unitarity_tol));
  put("max_halvings", std::to_string(e.max_halvings));
  put("constraint", fixed_nonadiabaticity ? "dh_over_g2tau:" + exact_number(*fixed_nonadiabaticity) : "none");
  std::string grid_text;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) grid_text += ',';
    grid_text += exact_number(grid[i]);
  }
  put("grid", grid_text);
  return s;
}

std::string SweepSpec::config_hash() const {
  const std::string text = canonical();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 15];
  }
  return hex;
}

std::shared_ptr<const SweepCache::Hamiltonian> SweepCache::hamiltonian(const ChainParams& chain, double h) {
  chain.validate();
  const HKey key{chain.n_sites, chain.coupling, chain.longitudinal, chain.max_sites, h};
  return get_or_compute(mutex_, hamiltonians_, key, [&] {
    HermitianOperator op = build_hamiltonian(chain, h);
    SpectralDecomposition spec = diagonalize(op);
    return std::make_shared<const Hamiltonian>(Hamiltonian{std::move(op), std::move(spec)});
  });
}

std::shared_ptr<const Propagator> SweepCache::long_ramp(const ChainParams& chain, const RampProtocol& protocol,
                                                        const EvolutionConfig& cfg) {
  chain.validate();
  const RampProtocol slow = protocol.with_duration(cfg.adiabatic_duration(chain.coupling));
  const PKey key{chain.n_sites,   chain.coupling,   chain.longitudinal, chain.max_sites,
                 slow.h_initial,  slow.delta_h,     slow.duration,      cfg.step_dt,
                 cfg.unitarity_tol, cfg.max_halvings};
  return get_or_compute(mutex_, propagators_, key, [&] {
    return std::make_shared<const Propagator>(evolve_propagator(chain, slow, cfg));
  });
}

std::size_t SweepCache::hamiltonian_entries() const {
  std::lock_guard lock(mutex_);
  return hamiltonians_.size();
}

std::size_t SweepCache::propagator_entries() const {
  std::lock_guard lock(mutex_);
  return propagators_.size();
}

PointResult evaluate_point(const PointSpec& point, SweepCache& cache) {
  point.validate();
  point.chain.validate();
  auto initial = cache.hamiltonian(point.chain, point.protocol.h_initial);
  auto final = cache.hamiltonian(point.chain, point.protocol.h_final());
  const DensityMatrix rho_i = gibbs_state(initial->spec, point.T_i).with_role(StateRole::Initial);
  const Propagator u = evolve_propagator(point.chain, point.protocol, point.evolution);
  const DensityMatrix rho_tau = evolve_state(rho_i, u);
  const auto slow = cache.long_ramp(point.chain, point.protocol, point.evolution);
  AdiabaticState adiabatic = adiabatic_state(rho_i, *slow, final->spec);
  const FrictionReport report = friction_report(rho_i, rho_tau, adiabatic.state, final->spec, initial->op);

  RowDiagnostics d;
  d.unitarity_defect = std::max(u.raw_unitarity_defect(), slow->raw_unitarity_defect());
  d.step_halvings = std::max(u.halvings(), slow->halvings());
  d.dephasing_entropy_excess = adiabatic.dephasing_entropy_excess;
  d.transport_distance = adiabatic.transport_distance;
  d.reordered_levels = adiabatic.reordered_levels;
  if (report.T_A > 0.0 && std::isfinite(report.T_A) && !report.support_violation) {
    d.identity_residual =
        std::max(identity_residuals(rho_tau, adiabatic.state, final->spec, report, report.T_A).max_abs(),
                 identity_residuals(rho_tau, adiabatic.state, final->spec, report, 2.0 * report.T_A).max_abs());
  } else {
    d.identity_residual = kNaN;
  }
  const auto pops_tau = project_diagonal(rho_tau, final->spec).second;
  const auto pops_A = project_diagonal(adiabatic.state, final->spec).second;
  d.two_level_friction = two_level_friction(pops_tau, pops_A, final->spec);
  d.mode_TA_dSd = kNaN;
  return PointResult{std::move(initial), std::move(final), rho_i,          rho_tau,
                     std::move(adiabatic), report,          d};
}

SweepRow evaluate_free_fermion_point(const PointSpec& point) {
  point.validate();
  const IntegrableReport ir = integrable_friction(point.chain, point.protocol, point.T_i, point.evolution);
  SweepRow row;
  row.report = nan_report();
  row.diagnostics = nan_diagnostics();
  FrictionReport& r = row.report;
  r.W_tau = ir.W_tau;
  r.W_A = ir.W_A;
  r.W_fric = ir.W_fric;
  r.T_A = ir.T_A;
  r.delta_S_d = ir.delta_S_d;
  r.T_A_delta_S_d = ir.T_A_delta_S_d;
  r.W_opt = ir.W_opt;
  r.D_tau_A = 0.0;
  r.D_diag_A = 0.0;
  for (const auto& m : ir.modes) {
    r.D_tau_A += m.weight * m.D_j;
    r.D_diag_A += m.weight * m.D_diag_j;
  }
  row.diagnostics.mode_TA_dSd = ir.mode_TA_dSd;
  row.diagnostics.step_halvings = 0;
  row.diagnostics.reordered_levels = 0;
  return row;
}

SweepResult run_sweep(const SweepSpec& spec, SweepCache* cache) {
  spec.validate();
  SweepCache local;
  SweepCache& shared = cache ? *cache : local;
  SweepResult result;
  result.axis = spec.axis;
  result.solver = spec.solver;
  result.coupling = spec.base.chain.coupling;
  result.config_hash = spec.config_hash();
  result.rows.resize(spec.grid.size());
  parallel_for(spec.grid.size(), spec.workers, [&](std::size_t i) {
    SweepRow row;
    const PointSpec p = spec.point(i);
    try {
      if (spec.solver == Solver::Exact) {
        const PointResult pr = evaluate_point(p, shared);
        row.report = pr.report;
        row.diagnostics = pr.diagnostics;
      } else {
        row = evaluate_free_fermion_point(p);
      }
    } catch (const std::exception& e) {
      row.report = nan_report();
      row.diagnostics = nan_diagnostics();
      row.error = e.what();
    }
    row.axis_value = spec.grid[i];
    result.rows[i] = std::move(row);
  });
  return result;
}

}  // namespace qfric
