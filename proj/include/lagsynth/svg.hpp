#pragma once

#include <string>
#include <vector>

// Static SVG renderers for report figures. Output is deterministic: the
// same inputs always produce the same bytes, numbers are formatted %.6g,
// and nothing here reads the clock or an RNG.

namespace lagsynth::svg {

// ---------------------------------------------------------------------------
// plot inputs
// ---------------------------------------------------------------------------

struct Series {
  std::string label;
  std::vector<double> y;  // x axis is the sample index
  std::string color;      // CSS color; empty picks from a fixed palette
};

struct Violin {
  std::string label;
  std::vector<double> values;
};

// Horizontal dashed reference line, e.g. an observed statistic over a null.
struct Marker {
  std::string label;
  double y = 0.0;
};

// ---------------------------------------------------------------------------
// renderers
// ---------------------------------------------------------------------------

// Overlaid line plot of one or more series against sample index.
std::string line_plot(const std::string& title,
                      const std::vector<Series>& series,
                      const std::string& x_label,
                      const std::string& y_label);

// One kernel-density silhouette per group with a median tick, plus optional
// dashed markers spanning the plot.
std::string violin_plot(const std::string& title,
                        const std::vector<Violin>& groups,
                        const std::string& y_label,
                        const std::vector<Marker>& markers = {});

// Cell grid with a diverging colormap centered at zero (blue negative,
// white zero, red positive), row labels left, column labels below, and a
// color scale on the right. values is row-major [rows x cols].
std::string heatmap(const std::string& title,
                    const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels,
                    const std::vector<double>& values);

}  // namespace lagsynth::svg
