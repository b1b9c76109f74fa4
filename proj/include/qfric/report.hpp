#pragma once

#include <string>
#include <vector>

#include "qfric/free_fermion.hpp"
#include "qfric/sweep.hpp"

namespace qfric {

// %.12g, with the literal tokens inf, -inf and nan.
std::string format_number(double v);

// Column names of a sweep CSV: the axis name, the fixed report columns, then
// extras and diagnostics.
std::vector<std::string> csv_columns(SweepAxis axis);

// First line of every CSV written here.
std::string csv_comment(const std::string& config_hash);

// Full CSV text. Energies are divided by g, times multiplied by g,
// temperatures divided by g; entropies are in nats.
std::string csv_text(const SweepResult& result);

// Writes `content` to a temporary file next to `path` and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

void emit_csv(const SweepResult& result, const std::string& path);

struct PopulationTable {
  RealVector energies;  // E_n^f
  RealVector p_diag;    // rho_tau^diag
  RealVector p_A;
  RealVector p_therm;   // Gibbs at T_A
  std::vector<double> cumulative_friction;
  double T_A = 0.0;
  double W_fric = 0.0;
};

PopulationTable population_table(const PointResult& point);
std::string population_csv(const PopulationTable& table, double coupling, const std::string& config_hash);

std::string modes_csv(const IntegrableReport& report, double coupling, const std::string& config_hash);

// Summary of the modes that carry at least `fraction` of the largest weighted
// per-mode friction.
struct AppreciableModes {
  int count = 0;
  double T_min = 0.0;
  double T_max = 0.0;
};
AppreciableModes appreciable_modes(const IntegrableReport& report, double fraction);

}  // namespace qfric
