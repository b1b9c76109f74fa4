#include "qfric/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include "qfric/errors.hpp"

namespace qfric {

namespace {

const std::map<std::string, std::string>& key_sections() {
  static const std::map<std::string, std::string> keys{
      {"n", "chain"},          {"g", "chain"},
      {"L", "chain"},          {"max_sites", "chain"},
      {"h_i", "protocol"},     {"dh", "protocol"},
      {"tau", "protocol"},     {"T_i", "state"},
      {"adiabatic_tau", "evolution"}, {"step_dt", "evolution"},
      {"unitarity_tol", "evolution"}, {"max_halvings", "evolution"},
      {"axis", "sweep"},       {"grid_start", "sweep"},
      {"grid_stop", "sweep"},  {"grid_points", "sweep"},
      {"grid_scale", "sweep"}, {"solver", "sweep"},
      {"constraint", "sweep"}, {"workers", "sweep"},
  };
  return keys;
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "': expected a finite number, got '" + text + "'");
  }
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::round(v) || std::abs(v) > 1e9) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

std::vector<double> make_grid(double start, double stop, int points, const std::string& scale) {
  if (points < 1) throw ConfigError("grid_points must be >= 1");
  if (scale != "lin" && scale != "log") throw ConfigError("grid_scale must be lin or log");
  if (scale == "log" && !(start > 0.0 && stop > 0.0)) {
    throw ConfigError("a log grid needs positive grid_start and grid_stop");
  }
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    if (i == points - 1 && points > 1) {
      grid[static_cast<std::size_t>(i)] = stop;
    } else if (scale == "lin") {
      grid[static_cast<std::size_t>(i)] = start + f * (stop - start);
    } else {
      grid[static_cast<std::size_t>(i)] = std::exp(std::log(start) + f * (std::log(stop) - std::log(start)));
    }
  }
  return grid;
}

SweepSpec parse_config(std::istream& in, const std::string& source) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  std::map<std::string, std::string> values;
  auto take = [&](const std::string& section, const std::string& key, const std::string& value) {
    const auto it = key_sections().find(key);
    if (it == key_sections().end()) throw ConfigError(source + ": unknown key '" + key + "'");
    if (!section.empty() && it->second != section) {
      throw ConfigError(source + ": key '" + key + "' belongs in [" + it->second + "], not [" + section + "]");
    }
    if (!values.emplace(key, value).second) throw ConfigError(source + ": duplicate key '" + key + "'");
  };
  static const std::set<std::string> sections{"chain", "protocol", "state", "evolution", "sweep"};
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      take("", name, node.data());
      continue;
    }
    if (!sections.count(name)) throw ConfigError(source + ": unknown section [" + name + "]");
    for (const auto& [key, leaf] : node) {
      if (!leaf.empty()) throw ConfigError(source + ": nested keys are not supported");
      take(name, key, leaf.data());
    }
  }
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    return it->second;
  };

  SweepSpec spec;
  PointSpec& b = spec.base;
  if (auto v = get("n")) b.chain.n_sites = to_int("n", *v);
  if (auto v = get("max_sites")) b.chain.max_sites = to_int("max_sites", *v);
  if (auto v = get("g")) b.chain.coupling = to_double("g", *v);
  if (auto v = get("L")) b.chain.longitudinal = to_double("L", *v);
  if (auto v = get("h_i")) b.protocol.h_initial = to_double("h_i", *v);
  if (auto v = get("dh")) b.protocol.delta_h = to_double("dh", *v);
  if (auto v = get("tau")) b.protocol.duration = to_double("tau", *v);
  if (auto v = get("T_i")) b.T_i = to_double("T_i", *v);
  if (auto v = get("adiabatic_tau")) b.evolution.adiabatic_tau = to_double("adiabatic_tau", *v);
  if (auto v = get("step_dt")) b.evolution.step_dt = to_double("step_dt", *v);
  if (auto v = get("unitarity_tol")) b.evolution.unitarity_tol = to_double("unitarity_tol", *v);
  if (auto v = get("max_halvings")) b.evolution.max_halvings = to_int("max_halvings", *v);
  if (auto v = get("workers")) spec.workers = to_int("workers", *v);
  if (auto v = get("solver")) spec.solver = parse_solver(*v);
  if (auto v = get("constraint")) {
    const std::string prefix = "dh_over_g2tau:";
    if (v->rfind(prefix, 0) != 0) {
      throw ConfigError(source + ": constraint must look like dh_over_g2tau:<value>");
    }
    spec.fixed_nonadiabaticity = to_double("constraint", v->substr(prefix.size()));
  }
  if (!(b.chain.coupling > 0.0)) throw ConfigError(source + ": g must be > 0");
  if (b.chain.n_sites < 1) throw ConfigError(source + ": n must be >= 1");

  const auto axis = get("axis");
  const auto start = get("grid_start");
  const auto stop = get("grid_stop");
  const auto points = get("grid_points");
  if (axis) {
    if (!start || !stop || !points) {
      throw ConfigError(source + ": a sweep needs grid_start, grid_stop and grid_points");
    }
    spec.axis = parse_axis(*axis);
    spec.grid = make_grid(to_double("grid_start", *start), to_double("grid_stop", *stop),
                          to_int("grid_points", *points), get("grid_scale").value_or("lin"));
  } else {
    if (start || stop || points || get("grid_scale")) {
      throw ConfigError(source + ": grid keys given without an axis");
    }
    spec.axis = SweepAxis::Tau;
    spec.grid = {b.protocol.duration};
  }
  spec.validate();
  return spec;
}

SweepSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace qfric
