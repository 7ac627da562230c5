#pragma once

// Deterministic file emission: CSV tables, JSON reports, SVG plots.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdmr/dynamics.hpp"
#include "pdmr/registry_io.hpp"
#include "pdmr/sequence_engine.hpp"

namespace pdmr {

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Header line plus one row per index; all columns must be the same length.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spectrum);
void write_trace_csv(const std::filesystem::path& path, const RabiTrace& trace);

/// Reads a two-column numeric CSV whose header must equal `expected_header`.
/// Errors name the offending row (1-based, header = row 1) and column.
std::pair<std::vector<double>, std::vector<double>> read_xy_csv(const std::filesystem::path& path,
                                                                const std::string& expected_header);

RabiTrace read_trace_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  double width = 1.5;
  bool markers = false;
  std::string label;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  bool log_x = false;
  bool log_y = false;
};

std::string render_svg(const Plot& plot);
void write_svg(const std::filesystem::path& path, const Plot& plot);

}  // namespace pdmr
