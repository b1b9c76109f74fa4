#include <doctest.h>

#include <cmath>

#include "qfric/chain.hpp"
#include "qfric/dynamics.hpp"
#include "qfric/errors.hpp"
#include "qfric/observables.hpp"
#include "qfric/thermal.hpp"

using namespace qfric;

namespace {

ChainParams chain(int n, double L) {
  ChainParams p;
  p.n_sites = n;
  p.longitudinal = L;
  return p;
}

RampProtocol ramp(double h_i, double dh, double tau) {
  RampProtocol r;
  r.h_initial = h_i;
  r.delta_h = dh;
  r.duration = tau;
  return r;
}

EvolutionConfig short_reference(double adiabatic_tau) {
  EvolutionConfig cfg;
  cfg.adiabatic_tau = adiabatic_tau;
  return cfg;
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("linear ramp values") {
    const auto r = ramp(1.5, 2.0, 4.0);
    CHECK(ramp_value(r, 0.0) == 1.5);
    CHECK(ramp_value(r, 4.0) == doctest::Approx(3.5).epsilon(1e-15));
    CHECK(ramp_value(r, 2.0) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK_THROWS_AS(ramp_value(r, 4.5), DomainError);
  }

  TEST_CASE("default step") {
    EvolutionConfig cfg;
    CHECK(cfg.step_for(5.0, 1.0) == doctest::Approx(1e-3));
    CHECK(cfg.step_for(0.1, 1.0) == doctest::Approx(1e-4));
    CHECK(cfg.adiabatic_duration(2.0) == doctest::Approx(50.0));
  }

  TEST_CASE("sudden quench propagator is the identity") {
    const auto u = evolve_propagator(chain(4, 1.0), ramp(1.5, 2.0, 0.0), {});
    CHECK((u.matrix() - Matrix::Identity(16, 16)).norm() == 0.0);
  }

  TEST_CASE("constant field matches the spectral exponential") {
    const auto params = chain(4, 1.0);
    const double tau = 2.0;
    const auto spec = diagonalize(build_hamiltonian(params, 1.5));
    const Eigen::VectorXcd phases = (Complex(0.0, -tau) * spec.eigenvalues.cast<Complex>()).array().exp();
    const Matrix exact = spec.eigenvectors * phases.asDiagonal() * spec.eigenvectors.adjoint();
    const auto u = evolve_propagator(params, ramp(1.5, 0.0, tau), {});
    CHECK((u.matrix() - exact).norm() < 1e-8);
  }

  TEST_CASE("single site picks up the integrated phase") {
    const double g = 1.0, h_i = 1.5, dh = 2.0, tau = 3.0;
    const double field_integral = h_i * tau + 0.5 * dh * tau;
    const auto u = evolve_propagator(chain(1, 0.0), ramp(h_i, dh, tau), {});
    // Spin up has energy -g - h(t), spin down -g + h(t).
    CHECK(std::abs(u.matrix()(0, 0) - std::exp(Complex(0.0, g * tau + field_integral))) < 1e-8);
    CHECK(std::abs(u.matrix()(1, 1) - std::exp(Complex(0.0, g * tau - field_integral))) < 1e-8);
    CHECK(std::abs(u.matrix()(0, 1)) < 1e-12);
  }

  TEST_CASE("evolution preserves spectrum and trace") {
    const auto params = chain(5, 1.0);
    const auto spec_i = diagonalize(build_hamiltonian(params, 1.5));
    const auto rho_i = gibbs_state(spec_i, 1.2);
    const auto u = evolve_propagator(params, ramp(1.5, 2.0, 0.7), {});
    CHECK(u.unitarity_defect() <= 1e-9 * static_cast<double>(u.dim()));
    CHECK(u.raw_unitarity_defect() <= 1e-9 * static_cast<double>(u.dim()));
    const auto rho_tau = evolve_state(rho_i, u);
    CHECK(rho_tau.matrix().trace().real() == doctest::Approx(1.0).epsilon(1e-10));
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_tau.matrix());
    RealVector before = rho_i.weights();
    std::sort(before.data(), before.data() + before.size());
    CHECK((es.eigenvalues() - before).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((rho_tau.matrix() * rho_tau.matrix()).trace().real() ==
          doctest::Approx((rho_i.matrix() * rho_i.matrix()).trace().real()).epsilon(1e-8));

    const auto same = evolve_state(rho_i, Propagator(Matrix::Identity(32, 32), 0.0, 0, 0, 0.0));
    CHECK((same.matrix() - rho_i.matrix()).norm() < 1e-14);
  }

  TEST_CASE("halving the step leaves the work unchanged") {
    const auto params = chain(4, 1.0);
    const auto protocol = ramp(1.5, 2.0, 1.75);
    const auto h_i = build_hamiltonian(params, 1.5);
    const auto h_f = build_hamiltonian(params, 3.5);
    const auto rho_i = gibbs_state(diagonalize(h_i), 3.0);
    EvolutionConfig coarse;
    EvolutionConfig fine;
    fine.step_dt = 0.5 * coarse.step_for(protocol.duration, 1.0);
    const double w_coarse = work(rho_i, h_i, evolve_state(rho_i, evolve_propagator(params, protocol, coarse)), h_f);
    const double w_fine = work(rho_i, h_i, evolve_state(rho_i, evolve_propagator(params, protocol, fine)), h_f);
    CHECK(std::abs(w_coarse - w_fine) < 1e-7);
  }

  TEST_CASE("too coarse a step is refined or rejected") {
    EvolutionConfig cfg;
    cfg.step_dt = 0.4;
    cfg.unitarity_tol = 1e-12;
    cfg.max_halvings = 1;
    CHECK_THROWS_AS(evolve_propagator(chain(3, 1.0), ramp(1.5, 2.0, 4.0), cfg), NumericalError);
    cfg.max_halvings = 4;
    cfg.step_dt = 0.02;
    cfg.unitarity_tol = 1e-9;
    const auto u = evolve_propagator(chain(3, 1.0), ramp(1.5, 2.0, 4.0), cfg);
    CHECK(u.halvings() >= 1);
    CHECK(u.raw_unitarity_defect() <= 1e-9 * 8);
  }

  TEST_CASE("adiabatic reference limits") {
    const auto params = chain(4, 1.0);
    const auto protocol = ramp(1.5, 2.0, 1.0);
    const auto cfg = short_reference(20.0);
    const auto spec_i = diagonalize(build_hamiltonian(params, 1.5));
    const auto mixed = gibbs_state(spec_i, kInfiniteTemperature);
    const auto a = adiabatic_state(mixed, params, protocol, cfg);
    CHECK((a.state.matrix() - Matrix::Identity(16, 16) / 16.0).norm() < 1e-12);

    const auto rho_i = gibbs_state(spec_i, 2.0);
    const auto still = adiabatic_state(rho_i, params, ramp(1.5, 0.0, 1.0), cfg);
    CHECK((still.state.matrix() - rho_i.matrix()).norm() < 1e-10);
  }

  TEST_CASE("adiabatic populations follow spectral transport") {
    const auto params = chain(6, 1.0);
    const auto protocol = ramp(1.5, 2.0, 1.0);
    const auto spec_i = diagonalize(build_hamiltonian(params, 1.5));
    const auto spec_f = diagonalize(build_hamiltonian(params, 3.5));
    const auto rho_i = gibbs_state(spec_i, 3.0);
    const auto a = adiabatic_state(rho_i, params, protocol, short_reference(60.0));
    // rho_A keeps the spectrum of rho_i and is diagonal in the final basis.
    RealVector p_A = a.state.populations_in(spec_f.eigenvectors);
    RealVector sorted_A = p_A, sorted_i = rho_i.weights();
    std::sort(sorted_A.data(), sorted_A.data() + sorted_A.size());
    std::sort(sorted_i.data(), sorted_i.data() + sorted_i.size());
    CHECK((sorted_A - sorted_i).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(a.transport_distance < 1e-2);
    CHECK(a.dephasing_entropy_excess >= -1e-12);
    const RealVector transport = sorted_transport_populations(rho_i, spec_i, spec_f);
    CHECK(transport.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}
