#pragma once

#include <string>
#include <vector>

namespace sadq {

/// Runs of one configuration (one metrics file per seed) drawn as a single
/// line: mean over seeds plus a min-max band.
struct PlotSeries {
  std::string label;
  std::vector<std::string> files;
};

struct PlotOptions {
  bool log_scale = false;
  std::string x_key = "env_steps";
  std::string title;
  int width = 720;
  int panel_height = 320;
};

/// Self-contained SVG with one panel per key. MissingKey when a file lacks a
/// key; IoError when a file cannot be read or the output cannot be written;
/// EmptyVector when there are no series or keys.
void emit_plot(const std::vector<PlotSeries>& series, const std::vector<std::string>& keys, const std::string& path,
               const PlotOptions& options = {});

/// Same as above but returns the SVG text.
std::string render_plot(const std::vector<PlotSeries>& series, const std::vector<std::string>& keys,
                        const PlotOptions& options = {});

struct Band {
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Aggregates key over files at x values present in every file; NaN cells are
/// ignored per point and points with no finite value are dropped.
Band aggregate_band(const std::vector<std::string>& files, const std::string& key, const std::string& x_key);

}  // namespace sadq
