#pragma once

#include <istream>
#include <string>
#include <vector>

#include "qfric/sweep.hpp"

namespace qfric {

// Flat key = value text with optional [sections]; '#' or ';' start a comment.
//
//   [chain]      n g L max_sites
//   [protocol]   h_i dh tau
//   [state]      T_i
//   [evolution]  adiabatic_tau step_dt unitarity_tol max_halvings
//   [sweep]      axis grid_start grid_stop grid_points grid_scale solver
//                constraint workers
//
// A key may appear in its own section or before any section header. Unknown
// sections or keys, duplicates and malformed values raise ConfigError.
// `constraint = dh_over_g2tau:<r>` holds dh / (g^2 tau) = r along the axis.
SweepSpec parse_config(std::istream& in, const std::string& source = "<config>");
SweepSpec load_config(const std::string& path);

// grid_points values from start to stop, evenly spaced on a linear or log scale.
std::vector<double> make_grid(double start, double stop, int points, const std::string& scale);

}  // namespace qfric
