#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qfric/config.hpp"
#include "qfric/errors.hpp"
#include "qfric/figures.hpp"
#include "qfric/report.hpp"
#include "qfric/sweep.hpp"

namespace {

using namespace qfric;

constexpr int kUsageExit = 2;
constexpr int kNumericalExit = 3;
constexpr double kIdentityTol = 1e-8;

// Raised when a computed result breaks one of the report invariants.
struct InvariantFailure {
  std::vector<std::string> messages;
};

void require_clean(const std::vector<std::string>& problems) {
  if (!problems.empty()) throw InvariantFailure{problems};
}

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

int run_sweep_command(const std::string& config_path, const std::string& out_dir, int workers) {
  SweepSpec spec = load_config(config_path);
  if (workers >= 0) spec.workers = workers;
  SweepCache cache;
  const SweepResult result = run_sweep(spec, &cache);
  const std::string name = stem(config_path);
  const std::string csv = (std::filesystem::path(out_dir) / (name + ".csv")).string();
  emit_csv(result, csv);

  FigureRecipe recipe;
  recipe.id = name;
  recipe.caption = "sweep " + name;
  DataSource source;
  source.name = "data";
  source.sweep = spec;
  recipe.sources = {source};
  Panel panel;
  panel.id = "main";
  panel.title = name;
  panel.x_column = to_string(spec.axis);
  panel.x_label = to_string(spec.axis);
  panel.x_scale = spec.axis == SweepAxis::Tau || spec.axis == SweepAxis::T_i ? "log" : "linear";
  panel.y_label = "work / g";
  panel.series = {{"data", "W_fric", "W_fric", "solid"},
                  {"data", "TA_dSd", "T_A dS_d", "dashdot"},
                  {"data", "TA_D_tau_A", "T_A D(rho_tau||rho_A)", "dashed"}};
  recipe.panels = {panel};
  // The sweep CSV is named after the config, not <id>_<source>.csv.
  std::string plot = plot_text(recipe, {result.config_hash});
  const std::string default_file = source_file(recipe, source);
  if (const auto at = plot.find(default_file); at != std::string::npos) plot.replace(at, default_file.size(), name + ".csv");
  const std::string plot_path = (std::filesystem::path(out_dir) / (name + ".plot.json")).string();
  write_file_atomic(plot_path, plot);

  std::cout << csv << "\n" << plot_path << "\n";
  int inf_rows = 0;
  for (const auto& row : result.rows) inf_rows += row.report.support_violation ? 1 : 0;
  if (inf_rows) std::cerr << "note: " << inf_rows << " row(s) with infinite relative entropy (inf_flag=1)\n";
  require_clean(sweep_problems(result, name));
  return 0;
}

int run_figure_command(const std::string& id, const std::string& out_dir, int workers) {
  const FigureRecipe recipe = figure_recipe(id);
  SweepCache cache;
  const FigureOutput out = run_figure(recipe, out_dir, cache, workers < 0 ? 0 : workers);
  for (const auto& f : out.files) std::cout << f << "\n";
  require_clean(out.problems);
  return 0;
}

struct ModesOptions {
  int n = 5000;
  double g = 1.0;
  double T_i = 3.0;
  double h_i = 1.5;
  double dh = 2.0;
  double tau = 1.0;
  double fraction = 0.1;
  std::string out;
};

int run_modes_command(const ModesOptions& o) {
  ChainParams chain;
  chain.n_sites = o.n;
  chain.coupling = o.g;
  RampProtocol protocol;
  protocol.h_initial = o.h_i;
  protocol.delta_h = o.dh;
  protocol.duration = o.tau;
  const IntegrableReport report = integrable_friction(chain, protocol, o.T_i, EvolutionConfig{});
  const AppreciableModes range = appreciable_modes(report, o.fraction);
  std::printf("modes=%zu W_fric=%s T_A=%s mode_TA_dSd=%s\n", report.modes.size(),
              format_number(report.W_fric / o.g).c_str(), format_number(report.T_A / o.g).c_str(),
              format_number(report.mode_TA_dSd / o.g).c_str());
  std::printf("appreciable (>= %s of max weighted friction): count=%d T_A_j in [%s, %s]\n",
              format_number(o.fraction).c_str(), range.count, format_number(range.T_min / o.g).c_str(),
              format_number(range.T_max / o.g).c_str());
  if (!o.out.empty()) {
    PointSpec point;
    point.chain = chain;
    point.protocol = protocol;
    point.T_i = o.T_i;
    write_file_atomic(o.out, modes_csv(report, o.g, point_hash(point, Solver::FreeFermion)));
  }
  return 0;
}

struct CheckOptions {
  PointSpec point;
  std::optional<double> adiabatic_tau;
  std::optional<double> step_dt;
  std::string out;
  bool convergence = false;
};

int run_check_command(CheckOptions o) {
  o.point.evolution.adiabatic_tau = o.adiabatic_tau;
  o.point.evolution.step_dt = o.step_dt;
  SweepCache cache;
  const PointResult r = evaluate_point(o.point, cache);
  const FrictionReport& rep = r.report;
  const double g = o.point.chain.coupling;
  std::printf("W_tau=%s W_A=%s W_fric=%s T_A=%s dS_d=%s T_A*dS_d=%s D_tau_A=%s D_diag_A=%s\n",
              format_number(rep.W_tau / g).c_str(), format_number(rep.W_A / g).c_str(),
              format_number(rep.W_fric / g).c_str(), format_number(rep.T_A / g).c_str(),
              format_number(rep.delta_S_d).c_str(), format_number(rep.T_A_delta_S_d / g).c_str(),
              format_number(rep.D_tau_A).c_str(), format_number(rep.D_diag_A).c_str());
  std::printf("unitarity_defect=%s halvings=%d dephasing_excess=%s transport_tv=%s reordered_levels=%d\n",
              format_number(r.diagnostics.unitarity_defect).c_str(), r.diagnostics.step_halvings,
              format_number(r.diagnostics.dephasing_entropy_excess).c_str(),
              format_number(r.diagnostics.transport_distance).c_str(), r.diagnostics.reordered_levels);

  std::vector<std::string> problems;
  for (const auto& v : rep.violations()) problems.push_back("invariant " + v + " violated");
  if (rep.support_violation) {
    std::printf("identity residuals skipped: relative entropy is infinite\n");
  } else if (!(rep.T_A > 0.0) || !std::isfinite(rep.T_A)) {
    std::printf("identity residuals skipped: T_A=%s\n", format_number(rep.T_A).c_str());
  } else {
    for (double T : {rep.T_A, 2.0 * rep.T_A}) {
      const IdentityResiduals res = identity_residuals(r.rho_tau, r.adiabatic.state, r.final->spec, rep, T);
      const struct {
        const char* name;
        double value;
      } rows[] = {{"relative_entropy_split", res.relative_entropy_split},
                  {"free_energy_split", res.free_energy_split},
                  {"thermal_reference_split", res.thermal_reference_split}};
      for (const auto& row : rows) {
        const bool ok = std::abs(row.value) < kIdentityTol;
        std::printf("T=%s %s residual=%s %s\n", format_number(T / g).c_str(), row.name,
                    format_number(row.value).c_str(), ok ? "ok" : "FAIL");
        if (!ok) problems.push_back(std::string("identity ") + row.name + " at T=" + format_number(T / g));
      }
    }
  }

  if (o.convergence) {
    PointSpec fine = o.point;
    fine.evolution.step_dt = 0.5 * fine.evolution.step_for(fine.protocol.duration, g);
    const PointResult rf = evaluate_point(fine, cache);
    std::printf("convergence: step %s -> %s  |dW_fric|=%s |dT_A dS_d|=%s\n",
                format_number(o.point.evolution.step_for(o.point.protocol.duration, g) * g).c_str(),
                format_number(*fine.evolution.step_dt * g).c_str(),
                format_number(std::abs(rf.report.W_fric - rep.W_fric) / g).c_str(),
                format_number(std::abs(rf.report.T_A_delta_S_d - rep.T_A_delta_S_d) / g).c_str());
  }

  if (!o.out.empty()) {
    SweepResult single;
    single.axis = SweepAxis::Tau;
    single.coupling = g;
    SweepSpec spec;
    spec.base = o.point;
    spec.grid = {o.point.protocol.duration};
    single.config_hash = spec.config_hash();
    SweepRow row;
    row.axis_value = o.point.protocol.duration;
    row.report = rep;
    row.diagnostics = r.diagnostics;
    single.rows = {row};
    emit_csv(single, o.out);
  }
  require_clean(problems);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frictional work, diagonal entropy and relative entropy in a driven Ising chain"};
  app.set_version_flag("--version", std::string(kVersionTag));
  app.require_subcommand(1);

  std::string out_dir = ".";
  int workers = -1;

  std::string config_path;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep from a config file");
  sweep->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--workers", workers, "Worker threads (0: hardware concurrency)")->check(CLI::NonNegativeNumber);

  std::string figure_id;
  auto* figure = app.add_subcommand("figure", "Regenerate the data and plot description of a figure");
  figure->add_option("id", figure_id, "Figure id")->required()->check(CLI::IsMember(figure_ids()));
  figure->add_option("--out", out_dir, "Output directory");
  figure->add_option("--workers", workers, "Worker threads (0: hardware concurrency)")->check(CLI::NonNegativeNumber);

  ModesOptions modes_opts;
  auto* modes = app.add_subcommand("modes", "Per-mode friction of the integrable chain (L = 0)");
  modes->add_option("--n", modes_opts.n, "Sites")->capture_default_str();
  modes->add_option("--g", modes_opts.g, "Coupling g")->capture_default_str();
  modes->add_option("--Ti", modes_opts.T_i, "Initial temperature")->capture_default_str();
  modes->add_option("--hi", modes_opts.h_i, "Initial transverse field")->capture_default_str();
  modes->add_option("--dh", modes_opts.dh, "Field step")->capture_default_str();
  modes->add_option("--tau", modes_opts.tau, "Ramp duration")->capture_default_str();
  modes->add_option("--fraction", modes_opts.fraction, "Appreciable-mode threshold")->capture_default_str();
  modes->add_option("--out", modes_opts.out, "Per-mode CSV file");

  CheckOptions check_opts;
  PointSpec& p = check_opts.point;
  auto* check = app.add_subcommand("check", "Evaluate one point and verify the exact identities");
  check->add_option("--n", p.chain.n_sites, "Sites")->capture_default_str();
  check->add_option("--g", p.chain.coupling, "Coupling g")->capture_default_str();
  check->add_option("--L", p.chain.longitudinal, "Longitudinal field")->capture_default_str();
  check->add_option("--Ti", p.T_i, "Initial temperature")->capture_default_str();
  check->add_option("--hi", p.protocol.h_initial, "Initial transverse field")->capture_default_str();
  check->add_option("--dh", p.protocol.delta_h, "Field step")->capture_default_str();
  check->add_option("--tau", p.protocol.duration, "Ramp duration")->capture_default_str();
  check->add_option("--max-sites", p.chain.max_sites, "Dense size limit")->capture_default_str();
  check->add_option("--adiabatic-tau", check_opts.adiabatic_tau, "Long-ramp duration");
  check->add_option("--step-dt", check_opts.step_dt, "Integrator step");
  check->add_option("--out", check_opts.out, "Single-row CSV file");
  check->add_flag("--convergence", check_opts.convergence, "Repeat with half the step and report the change");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageExit;
  }

  try {
    if (*sweep) return run_sweep_command(config_path, out_dir, workers);
    if (*figure) return run_figure_command(figure_id, out_dir, workers);
    if (*modes) return run_modes_command(modes_opts);
    if (*check) return run_check_command(check_opts);
  } catch (const InvariantFailure& f) {
    for (const auto& m : f.messages) std::cerr << "error: " << m << "\n";
    return kNumericalExit;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumericalExit;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageExit;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kUsageExit;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kUsageExit;
  } catch (const DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return kUsageExit;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
