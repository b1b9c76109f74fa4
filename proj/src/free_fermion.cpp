#include "qfric/free_fermion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qfric/errors.hpp"
#include "qfric/thermal.hpp"

namespace qfric {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_integrable(const ChainParams& params) {
  if (params.n_sites < 1) throw DomainError("n_sites must be >= 1");
  if (!(params.coupling > 0.0)) throw DomainError("coupling must be > 0");
  if (params.longitudinal != 0.0) throw DomainError("free-fermion solver requires L = 0");
}

double level_scale(const ModeSpec& spec) { return spec.self_paired ? 0.5 : 1.0; }

struct TwoLevelGibbs {
  double p_ground, p_excited, log_ground, log_excited;
};

// Populations of a two-level system with the given gap.
TwoLevelGibbs two_level_gibbs(double gap, double T) {
  if (T == kInf) return {0.5, 0.5, -std::numbers::ln2, -std::numbers::ln2};
  if (T == 0.0) return {1.0, 0.0, 0.0, -kInf};
  const double x = gap / T;
  const double lz = std::log1p(std::exp(-x));
  return {std::exp(-lz), std::exp(-x - lz), -lz, -x - lz};
}

// Columns: ground, excited; the largest component of each is real positive.
ModeMatrix mode_eigenvectors(const ModeMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ModeMatrix> solver(h);
  ModeMatrix v = solver.eigenvectors();
  for (int c = 0; c < 2; ++c) {
    const int k = std::abs(v(0, c)) >= std::abs(v(1, c)) ? 0 : 1;
    v.col(c) *= std::conj(v(k, c)) / std::abs(v(k, c));
  }
  return v;
}

ModeMatrix diagonal_state(const ModeMatrix& vectors, const TwoLevelGibbs& g) {
  return g.p_ground * vectors.col(0) * vectors.col(0).adjoint() +
         g.p_excited * vectors.col(1) * vectors.col(1).adjoint();
}

double binary_entropy(double p) {
  double s = 0.0;
  if (p > 0.0) s -= p * std::log(p);
  if (p < 1.0) s -= (1.0 - p) * std::log1p(-p);
  return s;
}

// Fermion occupation 1/(1 + e^{omega/T}).
double occupation(double omega, double T) {
  if (T == kInf) return 0.5;
  if (T == 0.0) return 0.0;
  return 1.0 / (1.0 + std::exp(omega / T));
}

double factorized_entropy(const std::vector<ModeSpec>& modes, bool final_field, double T) {
  double s = 0.0;
  for (const auto& m : modes) s += binary_entropy(occupation(final_field ? m.omega_f : m.omega_i, T));
  return s;
}

double factorized_energy(const std::vector<ModeSpec>& modes, bool final_field, double T) {
  double e = 0.0;
  for (const auto& m : modes) {
    const double w = final_field ? m.omega_f : m.omega_i;
    e -= 0.5 * w * (T == kInf ? 0.0 : (T == 0.0 ? 1.0 : std::tanh(0.5 * w / T)));
  }
  return e;
}

double pair_weight(const ModeSpec& spec, double T_i) {
  if (spec.self_paired) return 1.0;
  if (T_i == kInf) return 0.25;
  if (T_i == 0.0) return 0.5;
  // cosh x / (cosh x + 1) with x = omega_i / T_i, halved.
  const double x = spec.omega_i / T_i;
  const double sech = 2.0 * std::exp(-x) / (1.0 + std::exp(-2.0 * x));
  return 0.5 / (1.0 + sech);
}

ModeMatrix integrate_mode(const ModeSpec& spec, double coupling, const RampProtocol& protocol,
                          const EvolutionConfig& cfg) {
  const double tau = protocol.duration;
  if (tau == 0.0) return ModeMatrix::Identity();
  const ModeMatrix a = mode_hamiltonian(spec, coupling, 0.0);
  const ModeMatrix b = mode_hamiltonian(spec, coupling, 1.0) - a;
  const ModeMatrix ma = Complex(0.0, -1.0) * a;
  const ModeMatrix mb = Complex(0.0, -1.0) * b;
  const double budget = cfg.unitarity_tol * 2.0;
  double target_dt = cfg.step_for(tau, coupling);
  double defect = 0.0;
  for (int halving = 0; halving <= cfg.max_halvings; ++halving, target_dt *= 0.5) {
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(tau / target_dt - 1e-9)));
    const double dt = tau / static_cast<double>(steps);
    auto gen = [&](double t) -> ModeMatrix {
      return ma + (protocol.h_initial + protocol.delta_h * (t / tau)) * mb;
    };
    ModeMatrix u = ModeMatrix::Identity();
    for (long s = 0; s < steps; ++s) {
      const double t = static_cast<double>(s) * dt;
      const ModeMatrix g0 = gen(t), gh = gen(t + 0.5 * dt), g1 = gen(t + dt);
      const ModeMatrix k1 = g0 * u;
      const ModeMatrix k2 = gh * (u + (0.5 * dt) * k1);
      const ModeMatrix k3 = gh * (u + (0.5 * dt) * k2);
      const ModeMatrix k4 = g1 * (u + dt * k3);
      u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    defect = (u.adjoint() * u - ModeMatrix::Identity()).norm();
    if (defect > budget) continue;
    Eigen::JacobiSVD<ModeMatrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
  }
  throw NumericalError("integrator-step error: mode " + std::to_string(spec.index) + " unitarity defect " +
                       std::to_string(defect));
}

}  // namespace

void ModeState::validate() const {
  const double scale = std::max(1.0, rho.cwiseAbs().maxCoeff());
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DomainError("mode state is not Hermitian");
  }
  if (std::abs(rho.trace().real() - 1.0) > 1e-10) throw DomainError("mode state trace differs from 1");
  Eigen::SelfAdjointEigenSolver<ModeMatrix> solver(rho, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-10) throw DomainError("mode state is not positive semidefinite");
}

double dispersion(double coupling, double h, double theta) {
  const double arg = h * h + coupling * coupling - 2.0 * coupling * h * std::cos(theta);
  return 2.0 * std::sqrt(std::max(0.0, arg));
}

std::vector<ModeSpec> mode_spectrum(const ChainParams& params, double h) {
  RampProtocol flat;
  flat.h_initial = h;
  flat.delta_h = 0.0;
  return mode_spectrum(params, flat);
}

std::vector<ModeSpec> mode_spectrum(const ChainParams& params, const RampProtocol& protocol) {
  check_integrable(params);
  const int n = params.n_sites;
  std::vector<ModeSpec> modes(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    ModeSpec& m = modes[static_cast<std::size_t>(j - 1)];
    m.index = j;
    m.self_paired = 2 * j - 1 == n;
    m.theta = m.self_paired ? std::numbers::pi : (2.0 * j - 1.0) * std::numbers::pi / n;
    m.omega_i = dispersion(params.coupling, protocol.h_initial, m.theta);
    m.omega_f = dispersion(params.coupling, protocol.h_final(), m.theta);
  }
  return modes;
}

double ground_energy(std::span<const ModeSpec> modes) {
  double e = 0.0;
  for (const auto& m : modes) e -= 0.5 * m.omega_i;
  return e;
}

RealVector even_parity_spectrum(std::span<const ModeSpec> modes) {
  const std::size_t n = modes.size();
  if (n == 0 || n > 20) throw CapacityError("even-parity enumeration supports 1..20 modes");
  const double e0 = ground_energy(modes);
  std::vector<double> levels;
  levels.reserve(std::size_t{1} << (n - 1));
  for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
    if (std::popcount(mask) % 2 != 0) continue;
    double e = e0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (1UL << j)) e += modes[j].omega_i;
    }
    levels.push_back(e);
  }
  std::sort(levels.begin(), levels.end());
  return Eigen::Map<RealVector>(levels.data(), static_cast<Eigen::Index>(levels.size()));
}

ModeMatrix mode_hamiltonian(const ModeSpec& spec, double coupling, double h) {
  const double s = level_scale(spec);
  const double eps = 2.0 * (h - coupling * std::cos(spec.theta));
  const double delta = spec.self_paired ? 0.0 : 2.0 * coupling * std::sin(spec.theta);
  ModeMatrix m;
  m << s * eps, s * delta, s * delta, -s * eps;
  return m;
}

std::pair<ModeState, ModeState> mode_evolve(const ModeSpec& spec, double coupling, const RampProtocol& protocol,
                                            double T_i, const EvolutionConfig& cfg) {
  protocol.validate();
  cfg.validate();
  if (std::isnan(T_i) || T_i < 0.0) throw DomainError("T_i must be >= 0");
  const double s = level_scale(spec);
  const TwoLevelGibbs pops = two_level_gibbs(2.0 * s * spec.omega_i, T_i);
  const ModeMatrix v_i = mode_eigenvectors(mode_hamiltonian(spec, coupling, protocol.h_initial));
  const ModeMatrix v_f = mode_eigenvectors(mode_hamiltonian(spec, coupling, protocol.h_final()));
  const ModeMatrix rho_i = diagonal_state(v_i, pops);
  const ModeMatrix u = integrate_mode(spec, coupling, protocol, cfg);
  ModeState rho_tau{u * rho_i * u.adjoint()};
  ModeState rho_A{diagonal_state(v_f, pops)};
  return {rho_tau, rho_A};
}

double mode_temperature(const ModeSpec& spec, double T_i) {
  if (!(spec.omega_i > 0.0)) return kNaN;
  return T_i * spec.omega_f / spec.omega_i;
}

IntegrableReport integrable_friction(const ChainParams& params, const RampProtocol& protocol, double T_i,
                                     const EvolutionConfig& cfg) {
  check_integrable(params);
  protocol.validate();
  cfg.validate();
  if (std::isnan(T_i) || !(T_i > 0.0)) throw DomainError("T_i must be > 0");
  const std::vector<ModeSpec> modes = mode_spectrum(params, protocol);

  IntegrableReport out;
  out.modes.reserve(modes.size());
  for (const auto& m : modes) {
    if (!(m.omega_i > 0.0)) {
      throw DomainError("mode " + std::to_string(m.index) + " is gapless at the initial field");
    }
    const double s = level_scale(m);
    const TwoLevelGibbs pops = two_level_gibbs(2.0 * s * m.omega_i, T_i);
    const auto [rho_tau, rho_A] = mode_evolve(m, params.coupling, protocol, T_i, cfg);
    const ModeMatrix h_f = mode_hamiltonian(m, params.coupling, protocol.h_final());
    const ModeMatrix v_f = mode_eigenvectors(h_f);
    const ModeMatrix in_final = v_f.adjoint() * rho_tau.rho * v_f;
    const double q_ground = std::clamp(in_final(0, 0).real(), 0.0, 1.0);
    const double q_excited = 1.0 - q_ground;

    const double s_initial = binary_entropy(pops.p_excited);
    const double cross = q_ground * pops.log_ground +
                         (q_excited > 0.0 ? q_excited * pops.log_excited : 0.0);
    const double s_diag = binary_entropy(q_excited);

    ModeReport r;
    r.spec = m;
    r.weight = pair_weight(m, T_i);
    r.T_A_j = mode_temperature(m, T_i);
    r.W_fric_j = (q_excited - pops.p_excited) * 2.0 * s * m.omega_f;
    r.delta_S_d_j = s_diag - s_initial;
    r.D_j = -s_initial - cross;
    r.D_diag_j = -s_diag - cross;

    const double e_i = -s * m.omega_i * (pops.p_ground - pops.p_excited);
    const double e_tau = (rho_tau.rho * h_f).trace().real();
    const double e_A = -s * m.omega_f * (pops.p_ground - pops.p_excited);
    out.W_tau += r.weight * (e_tau - e_i);
    out.W_A += r.weight * (e_A - e_i);
    out.W_fric += r.weight * r.W_fric_j;
    out.mode_TA_dSd += r.weight * r.T_A_j * r.delta_S_d_j;
    out.delta_S_d += r.weight * r.delta_S_d_j;
    out.modes.push_back(r);
  }
  out.mode_remainder = out.W_fric - out.mode_TA_dSd;

  const double s_initial = factorized_entropy(modes, false, T_i);
  if (T_i == kInf) {
    out.T_A = kInf;
  } else {
    out.T_A = bisect_temperature([&](double T) { return factorized_entropy(modes, true, T); }, s_initial,
                                 "factorized effective temperature");
  }
  out.T_A_delta_S_d = out.T_A * out.delta_S_d;
  out.W_opt = factorized_energy(modes, true, out.T_A) - factorized_energy(modes, false, T_i);
  return out;
}

}  // namespace qfric
