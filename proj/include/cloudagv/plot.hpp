#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cloudagv/csv.hpp"

namespace cloudagv::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool equal_aspect = false;
  std::string comment;  ///< embedded as an XML comment (provenance)
};

/// Static SVG line chart. Series with one point are drawn as markers.
/// Output depends only on the inputs.
[[nodiscard]] std::string render_line_plot(const PlotSpec& spec, std::span<const Series> series);

struct HeatmapSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string value_label;
  double contour = 1.0;  ///< cells whose value exceeds this are outlined
  std::string comment;
};

/// values are row-major with y outer and x inner: values[iy * nx + ix].
[[nodiscard]] std::string render_heatmap(const HeatmapSpec& spec, std::span<const double> x_values,
                                         std::span<const double> y_values,
                                         std::span<const double> values);

struct LabeledTrace {
  std::string label;
  CsvTable table;
};

inline constexpr std::string_view kTrackPlot = "track.svg";
inline constexpr std::string_view kLateralPlot = "lateral_error.svg";
inline constexpr std::string_view kNuPlot = "nu.svg";

/// Writes track overlay, lateral error vs k and nu vs k, one curve per trace.
/// Throws CsvError naming missing columns, or for an empty trace.
std::vector<std::filesystem::path> render_trace_plots(std::span<const LabeledTrace> traces,
                                                      const std::filesystem::path& out_dir,
                                                      std::string_view comment = {});

}  // namespace cloudagv::plot
