#pragma once

// Minimal SVG charts. Output depends only on the inputs, so the same data
// always renders to the same bytes.

#include <string>
#include <vector>

#include "lfp/core.hpp"

namespace lfp {

struct Series {
  enum class Style { line, markers };
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  Style style = Style::line;
};

struct PlotOptions {
  std::string title;
  std::string x_label = "x";
  std::string y_label = "y";
  int width = 640;
  int height = 480;
  /// Draws y = x across the data range (scatter comparisons).
  bool identity_line = false;
};

std::string line_plot(const std::vector<Series>& series, const PlotOptions& options);

/// Every series drawn as markers.
std::string scatter_plot(std::vector<Series> series, const PlotOptions& options);

/// values(i, j) is drawn at row i (y, bottom to top) and column j (x), one
/// rect of class "cell" per entry. Optional marker series are overlaid.
std::string heatmap(const Matrix& values, double x_lo, double x_hi, double y_lo, double y_hi,
                    const PlotOptions& options, const std::vector<Series>& overlay = {});

/// Two series sharing x, with independent left and right y axes.
std::string dual_axis_plot(const Series& left, const Series& right, const PlotOptions& options,
                           const std::string& right_label);

}  // namespace lfp
