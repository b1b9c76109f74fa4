#pragma once

#include <string>
#include <vector>

#include "qfric/sweep.hpp"

namespace qfric {

enum class SourceKind { Sweep, Populations, Modes };

// One data file of a figure.
struct DataSource {
  std::string name;  // file is <figure>_<name>.csv
  SourceKind kind = SourceKind::Sweep;
  SweepSpec sweep;   // Sweep
  PointSpec point;   // Populations, Modes
};

struct PlotSeries {
  std::string source;
  std::string column;
  std::string label;
  std::string style;  // solid, dashed, dashdot, dotted, markers
};

struct ReferenceLine {
  std::string axis;  // x or y
  double value = 0.0;
  std::string label;
};

struct Panel {
  std::string id;
  std::string title;
  std::string chart = "line";  // line, bars, scatter
  std::string x_column;
  std::string x_label;
  std::string x_scale = "linear";
  std::string y_label;
  std::string y_scale = "linear";
  std::vector<PlotSeries> series;
  std::vector<ReferenceLine> references;
  std::string color_column;  // scatter only
};

struct FigureRecipe {
  std::string id;
  std::string caption;
  std::vector<DataSource> sources;
  std::vector<Panel> panels;
};

const std::vector<std::string>& figure_ids();

// ConfigError for an unknown id.
FigureRecipe figure_recipe(const std::string& id);

std::string source_file(const FigureRecipe& recipe, const DataSource& source);

// Declarative plot description (JSON). `hashes` holds the config hash of each
// source, in recipe order.
std::string plot_text(const FigureRecipe& recipe, const std::vector<std::string>& hashes);
void emit_plot(const FigureRecipe& recipe, const std::vector<std::string>& hashes, const std::string& path);

struct FigureOutput {
  std::vector<std::string> files;
  // Row errors and report invariant violations, one message each.
  std::vector<std::string> problems;
};

// Computes every source, writes its CSV and the plot file into `out_dir`.
FigureOutput run_figure(const FigureRecipe& recipe, const std::string& out_dir, SweepCache& cache, int workers);

// Config hash of a single-point source.
std::string point_hash(const PointSpec& point, Solver solver);

// Problems found in a sweep result, prefixed with `label`.
std::vector<std::string> sweep_problems(const SweepResult& result, const std::string& label);

}  // namespace qfric
