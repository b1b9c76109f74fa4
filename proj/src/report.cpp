#include "qfric/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "qfric/errors.hpp"

namespace qfric {

namespace {

const char* kUnits = "units: energy g, time 1/g, temperature g, entropy nats";

std::string sanitize(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

double axis_scale(SweepAxis axis, double g) {
  switch (axis) {
    case SweepAxis::Tau:
      return g;
    case SweepAxis::T_i:
    case SweepAxis::DeltaH:
    case SweepAxis::L:
      return 1.0 / g;
    case SweepAxis::N:
      return 1.0;
  }
  return 1.0;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> csv_columns(SweepAxis axis) {
  return {to_string(axis), "W_tau",  "W_A",         "W_fric",      "TA",
          "dSd",           "TA_dSd", "D_tau_A",     "D_diag_A",    "delta",
          "W_opt",         "TA_D_tau_A", "F_diag", "F_A",         "T_mean",
          "W_fric_2lvl",   "mode_TA_dSd", "identity_residual", "unitarity_defect", "halvings",
          "dephasing_excess", "transport_tv", "reordered_levels", "inf_flag", "error"};
}

std::string csv_comment(const std::string& config_hash) {
  return std::string("# ") + kVersionTag + " config_hash=" + config_hash + " " + kUnits + "\n";
}

std::string csv_text(const SweepResult& result) {
  const double g = result.coupling;
  std::string out = csv_comment(result.config_hash);
  const auto columns = csv_columns(result.axis);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += columns[i];
  }
  out += '\n';
  for (const auto& row : result.rows) {
    const FrictionReport& r = row.report;
    const RowDiagnostics& d = row.diagnostics;
    const double ta_d = std::isnan(r.T_A) || std::isnan(r.D_tau_A) ? std::nan("") : r.T_A * r.D_tau_A;
    const std::vector<std::string> cells{
        format_number(row.axis_value * axis_scale(result.axis, g)),
        format_number(r.W_tau / g),
        format_number(r.W_A / g),
        format_number(r.W_fric / g),
        format_number(r.T_A / g),
        format_number(r.delta_S_d),
        format_number(r.T_A_delta_S_d / g),
        format_number(r.D_tau_A),
        format_number(r.D_diag_A),
        format_number(r.delta),
        format_number(r.W_opt / g),
        format_number(ta_d / g),
        format_number(r.F_terms.diagonal / g),
        format_number(r.F_terms.adiabatic / g),
        format_number(r.T_mean_energy / g),
        format_number(d.two_level_friction / g),
        format_number(d.mode_TA_dSd / g),
        format_number(d.identity_residual / g),
        format_number(d.unitarity_defect),
        std::to_string(d.step_halvings),
        format_number(d.dephasing_entropy_excess),
        format_number(d.transport_distance),
        std::to_string(d.reordered_levels),
        r.support_violation ? "1" : "0",
        sanitize(row.error),
    };
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw Error("cannot create directory for '" + path + "': " + ec.message());
  }
  const fs::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + temp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("write to '" + temp.string() + "' failed");
  }
  fs::rename(temp, target, ec);
  if (ec) throw Error("cannot move '" + temp.string() + "' to '" + path + "': " + ec.message());
}

void emit_csv(const SweepResult& result, const std::string& path) { write_file_atomic(path, csv_text(result)); }

PopulationTable population_table(const PointResult& point) {
  const SpectralDecomposition& spec_f = point.final->spec;
  PopulationTable t;
  t.energies = spec_f.eigenvalues;
  const auto diag = project_diagonal(point.rho_tau, spec_f).second;
  const auto adiabatic = project_diagonal(point.adiabatic.state, spec_f).second;
  t.p_diag = diag.p;
  t.p_A = adiabatic.p;
  t.T_A = point.report.T_A;
  t.W_fric = point.report.W_fric;
  if (t.T_A > 0.0) {
    t.p_therm = gibbs_state(spec_f, t.T_A).weights();
  } else {
    t.p_therm = RealVector::Zero(spec_f.dim());
    for (Eigen::Index k = spec_f.blocks.front().begin; k < spec_f.blocks.front().end; ++k) {
      t.p_therm(k) = 1.0 / static_cast<double>(spec_f.blocks.front().size());
    }
  }
  t.cumulative_friction = cumulative_friction(diag, adiabatic, spec_f);
  return t;
}

std::string population_csv(const PopulationTable& table, double coupling, const std::string& config_hash) {
  std::string out = csv_comment(config_hash);
  out += "# T_A=" + format_number(table.T_A / coupling) + " W_fric=" + format_number(table.W_fric / coupling) + "\n";
  out += "n,E_n,p_diag,p_A,p_therm,w_fric_cumulative\n";
  for (Eigen::Index k = 0; k < table.energies.size(); ++k) {
    out += std::to_string(k + 1) + ',' + format_number(table.energies(k) / coupling) + ',' +
           format_number(table.p_diag(k)) + ',' + format_number(table.p_A(k)) + ',' +
           format_number(table.p_therm(k)) + ',' +
           format_number(table.cumulative_friction[static_cast<std::size_t>(k)] / coupling) + '\n';
  }
  return out;
}

std::string modes_csv(const IntegrableReport& report, double coupling, const std::string& config_hash) {
  std::string out = csv_comment(config_hash);
  out += "# W_fric=" + format_number(report.W_fric / coupling) + " T_A=" + format_number(report.T_A / coupling) +
         " mode_TA_dSd=" + format_number(report.mode_TA_dSd / coupling) + "\n";
  out += "j,theta,omega_i,omega_f,weight,T_A_j,W_fric_j,weighted_W_fric_j,dSd_j,D_j\n";
  for (const auto& m : report.modes) {
    out += std::to_string(m.spec.index) + ',' + format_number(m.spec.theta) + ',' +
           format_number(m.spec.omega_i / coupling) + ',' + format_number(m.spec.omega_f / coupling) + ',' +
           format_number(m.weight) + ',' + format_number(m.T_A_j / coupling) + ',' +
           format_number(m.W_fric_j / coupling) + ',' + format_number(m.weight * m.W_fric_j / coupling) + ',' +
           format_number(m.delta_S_d_j) + ',' + format_number(m.D_j) + '\n';
  }
  return out;
}

AppreciableModes appreciable_modes(const IntegrableReport& report, double fraction) {
  double largest = 0.0;
  for (const auto& m : report.modes) largest = std::max(largest, m.weight * m.W_fric_j);
  AppreciableModes out;
  if (!(largest > 0.0)) return out;
  out.T_min = std::numeric_limits<double>::infinity();
  out.T_max = -std::numeric_limits<double>::infinity();
  for (const auto& m : report.modes) {
    if (m.weight * m.W_fric_j < fraction * largest) continue;
    ++out.count;
    out.T_min = std::min(out.T_min, m.T_A_j);
    out.T_max = std::max(out.T_max, m.T_A_j);
  }
  return out;
}

}  // namespace qfric
