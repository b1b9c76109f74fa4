// Acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qfric/chain.hpp"
#include "qfric/config.hpp"
#include "qfric/free_fermion.hpp"
#include "qfric/observables.hpp"
#include "qfric/report.hpp"
#include "qfric/sweep.hpp"

using namespace qfric;

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PointSpec chain_point(double L, double T_i, double dh, double tau) {
  PointSpec p;
  p.chain.n_sites = 8;
  p.chain.longitudinal = L;
  p.protocol.h_initial = 1.5;
  p.protocol.delta_h = dh;
  p.protocol.duration = tau;
  p.T_i = T_i;
  return p;
}

double coherent_gap(const FrictionReport& r) {
  return std::abs(r.W_fric - r.T_A_delta_S_d) / r.W_fric;
}

struct Crossing {
  bool found = false;
  double grid_value = 0.0;    // first grid point of the trailing run below the threshold
  double interpolated = 0.0;  // log-linear crossing with the last failing point
};

// Smallest axis value beyond which the relative gap stays below `limit`.
Crossing trailing_crossing(const std::vector<double>& x, const std::vector<double>& gap, double limit) {
  Crossing c;
  std::ptrdiff_t last_bad = -1;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(gap[i] < limit)) last_bad = static_cast<std::ptrdiff_t>(i);
  if (last_bad + 1 >= static_cast<std::ptrdiff_t>(x.size())) return c;
  c.found = true;
  const auto k = static_cast<std::size_t>(last_bad + 1);
  c.grid_value = c.interpolated = x[k];
  if (last_bad >= 0 && std::isfinite(gap[k - 1])) {
    const double a = gap[k - 1] - limit, b = gap[k] - limit;
    const double s = a / (a - b);
    c.interpolated = std::exp(std::log(x[k - 1]) + s * (std::log(x[k]) - std::log(x[k - 1])));
  }
  return c;
}

struct Hygiene {
  double worst_defect_per_dim = 0.0;
  long runs = 0;

  void note(const RowDiagnostics& d, double dim) {
    if (std::isfinite(d.unitarity_defect)) worst_defect_per_dim = std::max(worst_defect_per_dim, d.unitarity_defect / dim);
    ++runs;
  }
};

SweepResult sweep(const PointSpec& base, SweepAxis axis, std::vector<double> grid, SweepCache& cache,
                  Hygiene& hygiene, int workers = 0) {
  SweepSpec s;
  s.base = base;
  s.axis = axis;
  s.grid = std::move(grid);
  s.workers = workers;
  SweepResult r = run_sweep(s, &cache);
  const double dim = std::ldexp(1.0, base.chain.n_sites);
  for (const auto& row : r.rows) hygiene.note(row.diagnostics, dim);
  return r;
}

std::vector<double> even_sector(const Matrix& h) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index b = 0; b < h.rows(); ++b)
    if (std::popcount(static_cast<unsigned long long>(b)) % 2 == 0) idx.push_back(b);
  Matrix sub(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) sub(i, j) = h(idx[i], idx[j]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

struct Context {
  SweepCache cache;
  Hygiene hygiene;
  std::vector<SweepResult> identity_grid;  // one tau sweep per T_i
  double identity_seconds = 0.0;
};

Outcome identities(Context& ctx) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int rows = 0, errors = 0;
  for (double T_i : make_grid(0.5, 5.0, 5, "log")) {
    ctx.identity_grid.push_back(
        sweep(chain_point(1.0, T_i, 2.0, 1.0), SweepAxis::Tau, make_grid(0.05, 5.0, 5, "log"), ctx.cache, ctx.hygiene));
    for (const auto& row : ctx.identity_grid.back().rows) {
      ++rows;
      if (!row.error.empty() || !std::isfinite(row.diagnostics.identity_residual)) {
        ++errors;
        continue;
      }
      worst = std::max(worst, row.diagnostics.identity_residual);
    }
  }
  ctx.identity_seconds = seconds_since(t0);
  return {errors == 0 && rows == 25 && worst < 1e-8 && ctx.identity_seconds < 600.0,
          fmt("max residual %.2e (< 1e-8) over %d points at T in {T_A, 2T_A}, %d failed rows; %.1f s (< 600 s)", worst,
              rows, errors, ctx.identity_seconds)};
}

Outcome minimal_work(Context& ctx) {
  double min_fric = std::numeric_limits<double>::infinity();
  double min_dsd = std::numeric_limits<double>::infinity();
  int rows = 0;
  for (const auto& r : ctx.identity_grid)
    for (const auto& row : r.rows) {
      min_fric = std::min(min_fric, row.report.W_fric);
      min_dsd = std::min(min_dsd, row.report.delta_S_d);
      ++rows;
    }
  return {rows == 25 && min_fric >= -1e-8 && min_dsd >= -1e-9,
          fmt("min W_fric %.3e (>= -1e-8), min dS_d %.3e (>= -1e-9) over %d points", min_fric, min_dsd, rows)};
}

Outcome tau_threshold(Context& ctx) {
  const auto grid = make_grid(0.05, 5.0, 60, "log");
  auto threshold = [&](PointSpec base) {
    const auto r = sweep(base, SweepAxis::Tau, grid, ctx.cache, ctx.hygiene);
    std::vector<double> gap;
    for (const auto& row : r.rows) gap.push_back(row.error.empty() ? coherent_gap(row.report) : kNaN);
    return trailing_crossing(grid, gap, 0.05);
  };
  const Crossing coarse = threshold(chain_point(1.0, 3.0, 2.0, 1.0));
  PointSpec converged = chain_point(1.0, 3.0, 2.0, 1.0);
  converged.evolution.adiabatic_tau = 400.0;
  const auto t0 = Clock::now();
  const Crossing c = threshold(converged);
  const double secs = seconds_since(t0);
  return {c.found && c.interpolated >= 0.5 && c.interpolated <= 0.9 && secs < 900.0,
          fmt("threshold tau %.4f (grid point %.4f) with adiabatic_tau 400, want [0.5, 0.9]; %.1f s (< 900 s); "
              "adiabatic_tau 100 gives %.4f",
              c.interpolated, c.grid_value, secs, coarse.interpolated)};
}

Outcome temperature_threshold(Context& ctx) {
  const auto grid = make_grid(0.2, 5.0, 40, "log");
  const auto r = sweep(chain_point(1.0, 3.0, 1.0, 1.0), SweepAxis::T_i, grid, ctx.cache, ctx.hygiene);
  std::vector<double> gap;
  for (const auto& row : r.rows) gap.push_back(row.error.empty() ? coherent_gap(row.report) : kNaN);
  const Crossing c = trailing_crossing(grid, gap, 0.05);
  return {c.found && c.interpolated >= 0.9 && c.interpolated <= 1.3,
          fmt("threshold T_i %.4f (grid point %.4f), want [0.9, 1.3]", c.interpolated, c.grid_value)};
}

Outcome two_level(Context& ctx) {
  double worst = 0.0;
  for (double L : {0.0, 1.0}) {
    PointSpec base;
    base.chain.n_sites = 1;
    base.chain.longitudinal = L;
    base.protocol.h_initial = 1.5;
    base.protocol.delta_h = 2.0;
    base.evolution.adiabatic_tau = 20.0;
    for (double tau : make_grid(0.05, 5.0, 10, "log")) {
      base.protocol.duration = tau;
      const auto r = sweep(base, SweepAxis::T_i, make_grid(0.2, 5.0, 10, "log"), ctx.cache, ctx.hygiene);
      for (const auto& row : r.rows) {
        const double rhs = row.report.T_A * row.report.D_tau_A;
        const double dev = row.error.empty() ? std::abs(row.report.W_fric - rhs) : kNaN;
        worst = std::isfinite(dev) ? std::max(worst, dev) : std::numeric_limits<double>::infinity();
      }
    }
  }
  PointResult low = evaluate_point(chain_point(1.0, 0.2, 1.0, 1.0), ctx.cache);
  ctx.hygiene.note(low.diagnostics, 256.0);
  const double total = low.report.W_fric;
  const double two = low.diagnostics.two_level_friction;
  const double rel = std::abs(two - total) / total;
  return {worst < 1e-9 && rel < 0.05,
          fmt("N=1 max |W_fric - T_A D| %.2e (< 1e-9) on 10x10 at L=0 and L=1; N=8 T_i=0.2: two-level %.6f vs "
              "total %.6f, rel %.4f (< 0.05)",
              worst, two, total, rel)};
}

Outcome free_fermion(Context& ctx) {
  double worst = 0.0;
  for (int n : {4, 8}) {
    ChainParams params;
    params.n_sites = n;
    const auto ed = even_sector(build_hamiltonian(params, 1.5).matrix());
    const RealVector ff = even_parity_spectrum(mode_spectrum(params, 1.5));
    if (static_cast<std::size_t>(ff.size()) != ed.size()) {
      worst = std::numeric_limits<double>::infinity();
      continue;
    }
    for (std::size_t k = 0; k < ed.size(); ++k) worst = std::max(worst, std::abs(ed[k] - ff(k)));
  }
  const PointSpec p = chain_point(0.0, 3.0, 2.0, 1.0);
  const PointResult exact = evaluate_point(p, ctx.cache);
  ctx.hygiene.note(exact.diagnostics, 256.0);
  const IntegrableReport modes = integrable_friction(p.chain, p.protocol, p.T_i);
  const double gap = std::abs(modes.W_fric - exact.report.W_fric) / exact.report.W_fric;
  return {worst < 1e-9 && gap < 0.05,
          fmt("even-parity spectrum max dev %.2e (< 1e-9) at N=4,8; N=8 W_fric modes %.6f vs ED %.6f, gap %.4f "
              "(< 0.05)",
              worst, modes.W_fric, exact.report.W_fric, gap)};
}

Outcome large_chain() {
  const auto t0 = Clock::now();
  ChainParams params;
  params.n_sites = 5000;
  RampProtocol protocol;
  const auto rep = integrable_friction(params, protocol, 3.0);
  const auto range = appreciable_modes(rep, 0.1);
  const double secs = seconds_since(t0);
  const bool ok = range.count > 0 && std::abs(range.T_min - 6.0) <= 1.0 && std::abs(range.T_max - 14.0) <= 1.0 &&
                  secs < 10.0;
  return {ok, fmt("%d appreciable modes with T_A^j in [%.3f, %.3f], want [6, 14] +- 1; %.2f s (< 10 s)", range.count,
                  range.T_min, range.T_max, secs)};
}

Outcome integrability_breaking(Context& ctx) {
  double excess[2][2];  // [tau][L]
  const double taus[2] = {5.0, 0.05};
  for (int t = 0; t < 2; ++t)
    for (int l = 0; l < 2; ++l) {
      const PointResult r = evaluate_point(chain_point(l, 2.0, 2.0, taus[t]), ctx.cache);
      ctx.hygiene.note(r.diagnostics, 256.0);
      excess[t][l] = r.report.W_tau - r.report.W_opt;
    }
  return {excess[0][1] < excess[0][0] && excess[1][1] > excess[1][0],
          fmt("W_tau - W_opt: tau=5 L=1 %.6f < L=0 %.6f; tau=0.05 L=1 %.6f > L=0 %.6f", excess[0][1], excess[0][0],
              excess[1][1], excess[1][0])};
}

Outcome hygiene(Context& ctx) {
  PointSpec ref = chain_point(1.0, 3.0, 2.0, 1.75);
  const PointResult coarse = evaluate_point(ref, ctx.cache);
  ref.evolution.step_dt = ref.evolution.step_for(1.75, 1.0) / 2.0;
  const PointResult fine = evaluate_point(ref, ctx.cache);
  ctx.hygiene.note(coarse.diagnostics, 256.0);
  ctx.hygiene.note(fine.diagnostics, 256.0);
  const double dw = std::abs(coarse.report.W_tau - fine.report.W_tau);

  SweepSpec s;
  s.base = chain_point(1.0, 3.0, 2.0, 1.0);
  s.grid = make_grid(0.05, 5.0, 8, "log");
  s.workers = 1;
  const std::string serial = csv_text(run_sweep(s, &ctx.cache));
  s.workers = 4;
  const std::string parallel = csv_text(run_sweep(s, &ctx.cache));
  const bool same = serial == parallel;

  const double unit = ctx.hygiene.worst_defect_per_dim;
  return {unit <= 1e-9 && dw < 1e-7 && same,
          fmt("max unitarity defect / dim %.2e (<= 1e-9) over %ld runs; step halving dW_tau %.2e (< 1e-7) at "
              "tau=1.75; serial and parallel CSV %s",
              unit, ctx.hygiene.runs, dw, same ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> expected_failures;
  std::vector<int> only;
  app.add_option("--expect-fail", expected_failures, "Criteria whose failure is known and recorded");
  app.add_option("--only", only, "Run a subset of criteria");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> expected(expected_failures.begin(), expected_failures.end());
  const std::set<int> selected(only.begin(), only.end());

  Context ctx;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"exact identities", [&] { return identities(ctx); }},
      {"minimal work", [&] { return minimal_work(ctx); }},
      {"tau threshold", [&] { return tau_threshold(ctx); }},
      {"temperature threshold", [&] { return temperature_threshold(ctx); }},
      {"two-level exactness", [&] { return two_level(ctx); }},
      {"free-fermion oracle", [&] { return free_fermion(ctx); }},
      {"large-chain mode range", [] { return large_chain(); }},
      {"integrability breaking", [&] { return integrability_breaking(ctx); }},
      {"numerical hygiene", [&] { return hygiene(ctx); }},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    if (id == 2 && ctx.identity_grid.empty()) identities(ctx);
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const char* tag = o.pass ? "PASS" : (expected.count(id) ? "FAIL (expected)" : "FAIL");
    if (!o.pass && !expected.count(id)) ++unexpected;
    std::printf("[%s] %d %s: %s\n", tag, id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return unexpected == 0 ? 0 : 1;
}
