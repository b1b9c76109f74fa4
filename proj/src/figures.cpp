#include "qfric/figures.hpp"

#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "qfric/config.hpp"
#include "qfric/errors.hpp"
#include "qfric/report.hpp"

namespace qfric {

namespace {

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

DataSource sweep_source(std::string name, const PointSpec& base, SweepAxis axis, std::vector<double> grid,
                        Solver solver = Solver::Exact) {
  DataSource s;
  s.name = std::move(name);
  s.kind = SourceKind::Sweep;
  s.sweep.base = base;
  s.sweep.axis = axis;
  s.sweep.grid = std::move(grid);
  s.sweep.solver = solver;
  s.point = base;
  return s;
}

DataSource point_source(std::string name, SourceKind kind, const PointSpec& point) {
  DataSource s;
  s.name = std::move(name);
  s.kind = kind;
  s.point = point;
  return s;
}

Panel friction_panel(std::string id, std::string title, const std::string& source, const std::string& x,
                     std::string x_label, std::string x_scale) {
  Panel p;
  p.id = std::move(id);
  p.title = std::move(title);
  p.x_column = x;
  p.x_label = std::move(x_label);
  p.x_scale = std::move(x_scale);
  p.y_label = "work / g";
  p.y_scale = "log";
  p.series = {{source, "W_fric", "W_fric", "solid"},
              {source, "TA_dSd", "T_A dS_d", "dashdot"},
              {source, "TA_D_tau_A", "T_A D(rho_tau||rho_A)", "dashed"}};
  return p;
}

void population_panels(FigureRecipe& r, const std::string& source, const std::string& label) {
  Panel pops;
  pops.id = source;
  pops.title = label + ": populations in the final eigenbasis";
  pops.chart = "bars";
  pops.x_column = "E_n";
  pops.x_label = "E_n^f / g";
  pops.y_label = "p_n";
  pops.y_scale = "log";
  pops.series = {{source, "p_diag", "rho_tau^diag", "markers"},
                 {source, "p_A", "rho_A", "solid"},
                 {source, "p_therm", "rho_TA^therm", "dashed"}};
  r.panels.push_back(pops);
  Panel cum;
  cum.id = source + "_cumulative";
  cum.title = label + ": cumulative frictional work";
  cum.x_column = "n";
  cum.x_label = "level n";
  cum.y_label = "w_fric^n / g";
  cum.series = {{source, "w_fric_cumulative", "cumulative W_fric", "solid"}};
  r.panels.push_back(cum);
}

std::string sweep_label(const SweepSpec& s) { return std::string(to_string(s.axis)); }

}  // namespace

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig2a", "fig2b", "fig2c", "fig3", "fig4a",
                                            "fig4b", "fig4c", "fig5a", "fig5b"};
  return ids;
}

FigureRecipe figure_recipe(const std::string& id) {
  FigureRecipe r;
  r.id = id;
  if (id == "fig2a") {
    r.caption = "Frictional work vs ramp duration; N=8, L=g, h_i=1.5g, T_i=3g, dh=2g";
    r.sources = {sweep_source("tau", chain_point(1.0, 3.0, 2.0, 1.0), SweepAxis::Tau, make_grid(0.05, 5.0, 40, "log"))};
    Panel p = friction_panel("a", "varying tau", "tau", "tau", "tau g", "log");
    p.references = {{"x", 0.68, "5% agreement threshold"}};
    r.panels = {p};
  } else if (id == "fig2b") {
    r.caption = "Frictional work vs initial temperature; N=8, L=g, h_i=1.5g, tau=1/g, dh=g";
    r.sources = {sweep_source("T_i", chain_point(1.0, 3.0, 1.0, 1.0), SweepAxis::T_i, make_grid(0.2, 5.0, 25, "log"))};
    Panel p = friction_panel("b", "varying T_i", "T_i", "T_i", "T_i / g", "log");
    p.series.push_back({"T_i", "W_fric_2lvl", "two lowest levels", "markers"});
    p.references = {{"x", 1.1, "5% agreement threshold"}};
    r.panels = {p};
  } else if (id == "fig2c") {
    r.caption = "Frictional work vs field step with dh/(g^2 tau) fixed; N=8, L=g, h_i=1.5g, T_i=3g";
    DataSource main = sweep_source("main", chain_point(1.0, 3.0, 2.0, 1.0), SweepAxis::DeltaH,
                                   make_grid(0.5, 3.0, 5, "lin"));
    main.sweep.fixed_nonadiabaticity = 2.0;
    DataSource inset = main;
    inset.name = "inset";
    inset.sweep.fixed_nonadiabaticity = 10.0;
    r.sources = {main, inset};
    Panel a = friction_panel("main", "dh/(g^2 tau) = 2", "main", "dh", "dh / g", "linear");
    Panel b = friction_panel("inset", "dh/(g^2 tau) = 10", "inset", "dh", "dh / g", "linear");
    a.series.pop_back();
    b.series.pop_back();
    r.panels = {a, b};
  } else if (id == "fig3") {
    r.caption = "Final-basis populations and cumulative frictional work; N=8, L=g, h_i=1.5g";
    r.sources = {point_source("i", SourceKind::Populations, chain_point(1.0, 3.0, 2.0, 1.75)),
                 point_source("ii", SourceKind::Populations, chain_point(1.0, 3.0, 2.0, 0.0)),
                 point_source("iii", SourceKind::Populations, chain_point(1.0, 0.5, 1.0, 1.0))};
    population_panels(r, "i", "(i) tau=1.75/g, T_i=3g, dh=2g");
    population_panels(r, "ii", "(ii) tau=0, T_i=3g, dh=2g");
    population_panels(r, "iii", "(iii) tau=1/g, T_i=0.5g, dh=g");
  } else if (id == "fig4a") {
    r.caption = "Integrable chain: frictional work vs ramp duration; N=8, L=0, h_i=1.5g, T_i=3g, dh=2g";
    const PointSpec base = chain_point(0.0, 3.0, 2.0, 1.0);
    const auto grid = make_grid(0.05, 5.0, 30, "log");
    r.sources = {sweep_source("exact", base, SweepAxis::Tau, grid),
                 sweep_source("free_fermion", base, SweepAxis::Tau, grid, Solver::FreeFermion)};
    Panel p;
    p.id = "a";
    p.title = "L = 0";
    p.x_column = "tau";
    p.x_label = "tau g";
    p.x_scale = "log";
    p.y_label = "work / g";
    p.y_scale = "log";
    p.series = {{"exact", "W_fric", "W_fric (exact)", "solid"},
                {"exact", "TA_dSd", "T_A dS_d", "dashdot"},
                {"free_fermion", "mode_TA_dSd", "sum_j T_A^j dS_d^j", "dotted"},
                {"free_fermion", "W_fric", "W_fric (modes)", "markers"}};
    r.panels = {p};
  } else if (id == "fig4b") {
    r.caption = "Adiabatic vs thermal populations; N=8, h_i=1.5g, T_i=3g, dh=2g, tau=1/g";
    r.sources = {point_source("L0", SourceKind::Populations, chain_point(0.0, 3.0, 2.0, 1.0)),
                 point_source("L1", SourceKind::Populations, chain_point(1.0, 3.0, 2.0, 1.0))};
    for (const auto& [src, title] : {std::pair{"L0", "(i) L = 0"}, std::pair{"L1", "(ii) L = g"}}) {
      Panel p;
      p.id = src;
      p.title = title;
      p.chart = "bars";
      p.x_column = "E_n";
      p.x_label = "E_n^f / g";
      p.y_label = "p_n";
      p.y_scale = "log";
      p.series = {{src, "p_A", "rho_A", "markers"}, {src, "p_therm", "rho_TA^therm", "solid"}};
      r.panels.push_back(p);
    }
  } else if (id == "fig4c") {
    r.caption = "Per-fermion effective temperatures; N=5000, L=0, h_i=1.5g, T_i=3g, dh=2g, tau=1/g";
    PointSpec p = chain_point(0.0, 3.0, 2.0, 1.0);
    p.chain.n_sites = 5000;
    r.sources = {point_source("modes", SourceKind::Modes, p)};
    Panel panel;
    panel.id = "c";
    panel.title = "T_A^j vs omega_j^f";
    panel.chart = "scatter";
    panel.x_column = "omega_f";
    panel.x_label = "omega_j^f / g";
    panel.y_label = "T_A^j / g";
    panel.series = {{"modes", "T_A_j", "T_A^j", "markers"}};
    panel.color_column = "weighted_W_fric_j";
    r.panels = {panel};
  } else if (id == "fig5a") {
    r.caption = "Work and optimal work vs ramp duration; N=8, h_i=1.5g, T_i=2g, dh=2g";
    const auto grid = make_grid(0.05, 5.0, 20, "log");
    r.sources = {sweep_source("L0", chain_point(0.0, 2.0, 2.0, 1.0), SweepAxis::Tau, grid),
                 sweep_source("L1", chain_point(1.0, 2.0, 2.0, 1.0), SweepAxis::Tau, grid)};
    Panel p;
    p.id = "a";
    p.title = "integrable (L=0) vs non-integrable (L=g)";
    p.x_column = "tau";
    p.x_label = "tau g";
    p.x_scale = "log";
    p.y_label = "work / g";
    p.series = {{"L0", "W_tau", "W_tau, L=0", "solid"},
                {"L0", "W_opt", "W_opt, L=0", "dotted"},
                {"L1", "W_tau", "W_tau, L=g", "solid"},
                {"L1", "W_opt", "W_opt, L=g", "dotted"}};
    r.panels = {p};
  } else if (id == "fig5b") {
    r.caption = "Work vs longitudinal field; N=8, h_i=1.5g, T_i=2g, dh=2g";
    const auto grid = make_grid(0.0, 2.0, 6, "lin");
    Panel p;
    p.id = "b";
    p.title = "varying L";
    p.x_column = "L";
    p.x_label = "L / g";
    p.y_label = "work / g";
    for (double tau : {0.05, 1.0, 5.0}) {
      char name[32];
      std::snprintf(name, sizeof name, "tau%g", tau);
      r.sources.push_back(sweep_source(name, chain_point(0.0, 2.0, 2.0, tau), SweepAxis::L, grid));
      p.series.push_back({name, "W_tau", std::string("W_tau, tau=") + format_number(tau) + "/g", "solid"});
    }
    p.series.push_back({r.sources.back().name, "W_opt", "W_opt", "dotted"});
    r.panels = {p};
  } else {
    std::string known;
    for (const auto& k : figure_ids()) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError("unknown figure '" + id + "' (known: " + known + ")");
  }
  return r;
}

std::string source_file(const FigureRecipe& recipe, const DataSource& source) {
  return recipe.id + "_" + source.name + ".csv";
}

std::string point_hash(const PointSpec& point, Solver solver) {
  SweepSpec s;
  s.base = point;
  s.axis = SweepAxis::Tau;
  s.grid = {point.protocol.duration};
  s.solver = solver;
  return s.config_hash();
}

std::string plot_text(const FigureRecipe& recipe, const std::vector<std::string>& hashes) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["format"] = "qfric-plot/1";
  doc["figure"] = recipe.id;
  doc["caption"] = recipe.caption;
  doc["version"] = kVersionTag;
  doc["units"] = {{"energy", "g"}, {"time", "1/g"}, {"temperature", "g"}, {"entropy", "nats"}};
  ordered_json sources = ordered_json::array();
  for (std::size_t i = 0; i < recipe.sources.size(); ++i) {
    const auto& s = recipe.sources[i];
    ordered_json j;
    j["name"] = s.name;
    j["file"] = source_file(recipe, s);
    j["kind"] = s.kind == SourceKind::Sweep ? "sweep" : s.kind == SourceKind::Populations ? "populations" : "modes";
    if (s.kind == SourceKind::Sweep) j["axis"] = sweep_label(s.sweep);
    j["config_hash"] = i < hashes.size() ? hashes[i] : "";
    sources.push_back(j);
  }
  doc["sources"] = sources;
  ordered_json panels = ordered_json::array();
  for (const auto& p : recipe.panels) {
    ordered_json j;
    j["id"] = p.id;
    j["title"] = p.title;
    j["chart"] = p.chart;
    j["x"] = {{"column", p.x_column}, {"label", p.x_label}, {"scale", p.x_scale}};
    j["y"] = {{"label", p.y_label}, {"scale", p.y_scale}};
    ordered_json series = ordered_json::array();
    for (const auto& s : p.series) {
      series.push_back({{"source", s.source}, {"column", s.column}, {"label", s.label}, {"style", s.style}});
    }
    j["series"] = series;
    if (!p.color_column.empty()) j["color"] = {{"column", p.color_column}};
    ordered_json refs = ordered_json::array();
    for (const auto& ref : p.references) {
      refs.push_back({{"axis", ref.axis}, {"value", ref.value}, {"label", ref.label}, {"style", "dotted"}});
    }
    j["reference_lines"] = refs;
    panels.push_back(j);
  }
  doc["panels"] = panels;
  return doc.dump(2) + "\n";
}

void emit_plot(const FigureRecipe& recipe, const std::vector<std::string>& hashes, const std::string& path) {
  write_file_atomic(path, plot_text(recipe, hashes));
}

std::vector<std::string> sweep_problems(const SweepResult& result, const std::string& label) {
  std::vector<std::string> out;
  for (const auto& row : result.rows) {
    const std::string where = label + " " + to_string(result.axis) + "=" + format_number(row.axis_value) + ": ";
    if (!row.error.empty()) {
      out.push_back(where + row.error);
      continue;
    }
    for (const auto& v : row.report.violations()) out.push_back(where + "invariant " + v + " violated");
  }
  return out;
}

FigureOutput run_figure(const FigureRecipe& recipe, const std::string& out_dir, SweepCache& cache, int workers) {
  namespace fs = std::filesystem;
  FigureOutput out;
  std::vector<std::string> hashes;
  for (const auto& source : recipe.sources) {
    const std::string path = (fs::path(out_dir) / source_file(recipe, source)).string();
    const std::string label = recipe.id + "/" + source.name;
    const double g = source.point.chain.coupling;
    switch (source.kind) {
      case SourceKind::Sweep: {
        SweepSpec spec = source.sweep;
        spec.workers = workers;
        const SweepResult result = run_sweep(spec, &cache);
        hashes.push_back(result.config_hash);
        emit_csv(result, path);
        for (auto& p : sweep_problems(result, label)) out.problems.push_back(std::move(p));
        break;
      }
      case SourceKind::Populations: {
        const std::string hash = point_hash(source.point, Solver::Exact);
        hashes.push_back(hash);
        const PointResult point = evaluate_point(source.point, cache);
        for (const auto& v : point.report.violations()) out.problems.push_back(label + ": invariant " + v + " violated");
        write_file_atomic(path, population_csv(population_table(point), g, hash));
        break;
      }
      case SourceKind::Modes: {
        const std::string hash = point_hash(source.point, Solver::FreeFermion);
        hashes.push_back(hash);
        const IntegrableReport report =
            integrable_friction(source.point.chain, source.point.protocol, source.point.T_i, source.point.evolution);
        write_file_atomic(path, modes_csv(report, g, hash));
        break;
      }
    }
    out.files.push_back(path);
  }
  const std::string plot_path = (fs::path(out_dir) / (recipe.id + ".plot.json")).string();
  emit_plot(recipe, hashes, plot_path);
  out.files.push_back(plot_path);
  return out;
}

}  // namespace qfric
