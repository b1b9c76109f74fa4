#include <doctest.h>

#include <cmath>

#include "qfric/config.hpp"
#include "qfric/errors.hpp"
#include "qfric/report.hpp"
#include "qfric/sweep.hpp"

using namespace qfric;

namespace {

SweepSpec small_sweep(int n, SweepAxis axis, std::vector<double> grid) {
  SweepSpec s;
  s.base.chain.n_sites = n;
  s.base.chain.longitudinal = 1.0;
  s.base.protocol.h_initial = 1.5;
  s.base.protocol.delta_h = 2.0;
  s.base.protocol.duration = 1.0;
  s.base.T_i = 3.0;
  s.base.evolution.adiabatic_tau = 20.0;
  s.axis = axis;
  s.grid = std::move(grid);
  return s;
}

}  // namespace

TEST_SUITE("sweep") {
  TEST_CASE("a single point matches a direct evaluation") {
    auto spec = small_sweep(4, SweepAxis::Tau, {0.8});
    const SweepResult res = run_sweep(spec);
    REQUIRE(res.rows.size() == 1);
    SweepCache cache;
    PointSpec p = spec.base;
    p.protocol.duration = 0.8;
    const PointResult direct = evaluate_point(p, cache);
    const auto& row = res.rows[0];
    CHECK(row.error.empty());
    CHECK(row.report.W_tau == direct.report.W_tau);
    CHECK(row.report.W_fric == direct.report.W_fric);
    CHECK(row.report.T_A == direct.report.T_A);
    CHECK(row.report.D_tau_A == direct.report.D_tau_A);
    CHECK(row.diagnostics.identity_residual == direct.diagnostics.identity_residual);
  }

  TEST_CASE("worker count does not change the output") {
    auto spec = small_sweep(5, SweepAxis::Tau, make_grid(0.05, 5.0, 9, "log"));
    spec.workers = 1;
    const std::string serial = csv_text(run_sweep(spec));
    spec.workers = 4;
    const std::string parallel = csv_text(run_sweep(spec));
    CHECK(serial == parallel);
  }

  TEST_CASE("cached and uncached rows agree") {
    const auto spec = small_sweep(4, SweepAxis::T_i, {0.5, 1.0, 2.0, 4.0});
    SweepCache cache;
    const std::string first = csv_text(run_sweep(spec, &cache));
    CHECK(cache.hamiltonian_entries() == 2);
    CHECK(cache.propagator_entries() == 1);
    const std::string again = csv_text(run_sweep(spec, &cache));
    const std::string fresh = csv_text(run_sweep(spec));
    CHECK(first == again);
    CHECK(first == fresh);
  }

  TEST_CASE("sudden quench rows skip the integrator") {
    const auto res = run_sweep(small_sweep(4, SweepAxis::Tau, {0.0, 0.5}));
    CHECK(res.rows[0].error.empty());
    CHECK(res.rows[0].report.W_fric > 0.0);
  }

  TEST_CASE("friction is non-negative and vanishes for slow ramps") {
    auto spec = small_sweep(6, SweepAxis::Tau, make_grid(0.05, 10.0, 12, "log"));
    spec.base.evolution.adiabatic_tau = 100.0;
    const auto res = run_sweep(spec);
    for (const auto& row : res.rows) {
      CHECK(row.error.empty());
      CHECK(row.report.W_fric >= -1e-8);
      CHECK(row.report.violations().empty());
      CHECK(row.diagnostics.identity_residual < 1e-8);
    }
    CHECK(res.rows.back().report.W_fric < 0.01 * res.rows.front().report.W_fric);
  }

  TEST_CASE("nonadiabaticity constraint couples tau and dh") {
    auto spec = small_sweep(4, SweepAxis::Tau, {0.5, 1.0});
    spec.fixed_nonadiabaticity = 2.0;
    CHECK(spec.point(1).protocol.delta_h == doctest::Approx(2.0));
    CHECK(spec.point(0).protocol.delta_h == doctest::Approx(1.0));
    spec.axis = SweepAxis::DeltaH;
    spec.grid = {1.0, 3.0};
    CHECK(spec.point(1).protocol.duration == doctest::Approx(1.5));
    spec.axis = SweepAxis::T_i;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
  }

  TEST_CASE("invalid grids are configuration errors") {
    CHECK_THROWS_AS(run_sweep(small_sweep(4, SweepAxis::Tau, {})), ConfigError);
    CHECK_THROWS_AS(run_sweep(small_sweep(4, SweepAxis::Tau, {1.0, 0.5, 2.0})), ConfigError);
    CHECK_THROWS_AS(run_sweep(small_sweep(4, SweepAxis::T_i, {-1.0, 1.0})), ConfigError);
    CHECK_THROWS_AS(run_sweep(small_sweep(13, SweepAxis::Tau, {1.0})), ConfigError);
  }

  TEST_CASE("row failures are recorded, not thrown") {
    auto spec = small_sweep(6, SweepAxis::L, {0.0, 0.5});
    spec.solver = Solver::FreeFermion;
    const auto res = run_sweep(spec);
    CHECK(res.rows[0].error.empty());
    CHECK(res.rows[0].report.W_fric > 0.0);
    CHECK_FALSE(res.rows[1].error.empty());
    CHECK(std::isnan(res.rows[1].report.W_fric));
    CHECK(res.rows[1].flagged());
  }

  TEST_CASE("free-fermion rows follow the mode solver") {
    auto spec = small_sweep(8, SweepAxis::Tau, {1.0});
    spec.base.chain.longitudinal = 0.0;
    spec.solver = Solver::FreeFermion;
    const auto row = run_sweep(spec).rows[0];
    const auto direct = integrable_friction(spec.base.chain, spec.base.protocol, 3.0);
    CHECK(row.report.W_fric == direct.W_fric);
    CHECK(row.diagnostics.mode_TA_dSd == direct.mode_TA_dSd);
    CHECK(std::isnan(row.report.delta));
  }

  TEST_CASE("config hash tracks every result-relevant field") {
    const auto a = small_sweep(4, SweepAxis::Tau, {1.0, 2.0});
    auto b = a;
    CHECK(a.config_hash() == b.config_hash());
    CHECK(a.config_hash().size() == 64);
    b.workers = 7;
    CHECK(a.config_hash() == b.config_hash());
    b.base.T_i = 3.0000001;
    CHECK(a.config_hash() != b.config_hash());
    b = a;
    b.base.evolution.adiabatic_tau = 40.0;
    CHECK(a.config_hash() != b.config_hash());
    b = a;
    b.solver = Solver::FreeFermion;
    CHECK(a.config_hash() != b.config_hash());
  }
}
