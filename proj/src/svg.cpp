#include "lagsynth/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lagsynth/common.hpp"
#include "lagsynth/linalg.hpp"

namespace lagsynth::svg {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 44.0;
constexpr double kMarginBottom = 54.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// Linear data-to-pixel mapping over [lo, hi] -> [px_lo, px_hi].
struct Scale {
  double lo = 0.0, hi = 1.0, px_lo = 0.0, px_hi = 1.0;
  double operator()(double v) const {
    return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
  }
};

// Pads a degenerate range so every scale has nonzero extent.
void pad_range(double& lo, double& hi) {
  if (lo > hi) std::swap(lo, hi);
  if (hi - lo < 1e-12) {
    const double pad = std::max(1.0, std::fabs(lo)) * 0.5;
    lo -= pad;
    hi += pad;
  }
}

// Round tick positions covering [lo, hi] with a 1/2/2.5/5 step ladder.
std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = 10.0 * mag;
  for (double m : {1.0, 2.0, 2.5, 5.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + 0.5 * step * 1e-9 + 1e-300; t += step) {
    if (t >= lo - step * 1e-9) ticks.push_back(t == 0.0 ? 0.0 : t);
    if (ticks.size() > 32) break;
  }
  return ticks;
}

std::string header() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) +
         "\" height=\"" + fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) +
         " " + fmt(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"" +
         fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
         "\" fill=\"#ffffff\"/>\n";
}

std::string title_text(const std::string& title) {
  return "<text x=\"" + fmt(kWidth / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
}

std::string axis_label_x(const std::string& label) {
  return "<text x=\"" + fmt((kMarginLeft + kWidth - kMarginRight) / 2) +
         "\" y=\"" + fmt(kHeight - 12.0) + "\" text-anchor=\"middle\">" +
         escape(label) + "</text>\n";
}

std::string axis_label_y(const std::string& label) {
  const double cy = (kMarginTop + kHeight - kMarginBottom) / 2;
  return "<text x=\"18\" y=\"" + fmt(cy) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " + fmt(cy) +
         ")\">" + escape(label) + "</text>\n";
}

// Frame, horizontal grid lines, and y tick labels shared by the plots.
std::string y_axis(const Scale& ys) {
  std::string out;
  for (double t : nice_ticks(ys.lo, ys.hi)) {
    const double py = ys(t);
    out += "<line x1=\"" + fmt(kMarginLeft) + "\" y1=\"" + fmt(py) +
           "\" x2=\"" + fmt(kWidth - kMarginRight) + "\" y2=\"" + fmt(py) +
           "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + fmt(kMarginLeft - 6.0) + "\" y=\"" + fmt(py + 4.0) +
           "\" text-anchor=\"end\">" + fmt(t) + "</text>\n";
  }
  out += "<rect x=\"" + fmt(kMarginLeft) + "\" y=\"" + fmt(kMarginTop) +
         "\" width=\"" + fmt(kWidth - kMarginLeft - kMarginRight) +
         "\" height=\"" + fmt(kHeight - kMarginTop - kMarginBottom) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";
  return out;
}

// Diverging blue-white-red map for t in [-1, 1].
std::string diverging_color(double t) {
  t = std::clamp(t, -1.0, 1.0);
  const double a = std::fabs(t);
  const int lo_r = 59, lo_g = 76, lo_b = 192;    // blue end
  const int hi_r = 180, hi_g = 4, hi_b = 38;     // red end
  const int er = t < 0 ? lo_r : hi_r;
  const int eg = t < 0 ? lo_g : hi_g;
  const int eb = t < 0 ? lo_b : hi_b;
  const int r = int(std::lround((1.0 - a) * 255 + a * er));
  const int g = int(std::lround((1.0 - a) * 255 + a * eg));
  const int b = int(std::lround((1.0 - a) * 255 + a * eb));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

// ---------------------------------------------------------------------------
// line plot
// ---------------------------------------------------------------------------

std::string line_plot(const std::string& title,
                      const std::vector<Series>& series,
                      const std::string& x_label,
                      const std::string& y_label) {
  require(!series.empty(), "svg::line_plot", "no series");
  std::size_t max_len = 0;
  double ylo = 0.0, yhi = 0.0;
  bool first = true;
  for (const auto& s : series) {
    require(!s.y.empty(), "svg::line_plot", "empty series " + s.label);
    max_len = std::max(max_len, s.y.size());
    for (double v : s.y) {
      require(std::isfinite(v), "svg::line_plot", "non-finite value");
      if (first || v < ylo) ylo = v;
      if (first || v > yhi) yhi = v;
      first = false;
    }
  }
  pad_range(ylo, yhi);

  const Scale xs{0.0, double(max_len > 1 ? max_len - 1 : 1), kMarginLeft,
                 kWidth - kMarginRight};
  const Scale ys{ylo, yhi, kHeight - kMarginBottom, kMarginTop};

  std::string out = header() + title_text(title) + y_axis(ys);
  for (double t : nice_ticks(xs.lo, xs.hi)) {
    out += "<text x=\"" + fmt(xs(t)) + "\" y=\"" +
           fmt(kHeight - kMarginBottom + 16.0) +
           "\" text-anchor=\"middle\">" + fmt(t) + "</text>\n";
  }
  out += axis_label_x(x_label) + axis_label_y(y_label);

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string color =
        s.color.empty() ? kPalette[i % kPaletteSize] : s.color;
    std::string pts;
    for (std::size_t t = 0; t < s.y.size(); ++t) {
      if (t) pts += ' ';
      pts += fmt(xs(double(t))) + "," + fmt(ys(s.y[t]));
    }
    out += "<polyline fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";

    // Legend swatch + label, stacked inside the top-right corner.
    const double lx = kWidth - kMarginRight - 150.0;
    const double ly = kMarginTop + 14.0 + 18.0 * double(i);
    out += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly - 4.0) + "\" x2=\"" +
           fmt(lx + 22.0) + "\" y2=\"" + fmt(ly - 4.0) + "\" stroke=\"" +
           color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + fmt(lx + 28.0) + "\" y=\"" + fmt(ly) + "\">" +
           escape(s.label) + "</text>\n";
  }
  return out + "</svg>\n";
}

// ---------------------------------------------------------------------------
// violin plot
// ---------------------------------------------------------------------------

std::string violin_plot(const std::string& title,
                        const std::vector<Violin>& groups,
                        const std::string& y_label,
                        const std::vector<Marker>& markers) {
  require(!groups.empty(), "svg::violin_plot", "no groups");

  // Shared y range covers every silhouette's kernel support plus markers.
  double ylo = 0.0, yhi = 0.0;
  bool first = true;
  std::vector<double> bandwidths(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& vals = groups[g].values;
    require(!vals.empty(), "svg::violin_plot",
            "empty group " + groups[g].label);
    for (double v : vals) {
      require(std::isfinite(v), "svg::violin_plot", "non-finite value");
    }
    const double sd = std::sqrt(linalg::variance(vals.data(), vals.size()));
    // Silverman's rule; a tiny floor keeps constant groups drawable.
    double h = 0.9 * sd * std::pow(double(vals.size()), -0.2);
    if (h < 1e-9) {
      h = 1e-3 * std::max(1.0, std::fabs(vals[0]));
    }
    bandwidths[g] = h;
    const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
    if (first || *mn - 3 * h < ylo) ylo = *mn - 3 * h;
    if (first || *mx + 3 * h > yhi) yhi = *mx + 3 * h;
    first = false;
  }
  for (const auto& m : markers) {
    ylo = std::min(ylo, m.y);
    yhi = std::max(yhi, m.y);
  }
  pad_range(ylo, yhi);

  const Scale ys{ylo, yhi, kHeight - kMarginBottom, kMarginTop};
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double slot = plot_w / double(groups.size());
  const double half = 0.38 * slot;

  std::string out = header() + title_text(title) + y_axis(ys);
  out += axis_label_y(y_label);

  constexpr int kCurvePoints = 64;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& vals = groups[g].values;
    const double h = bandwidths[g];
    const double cx = kMarginLeft + slot * (double(g) + 0.5);

    // Gaussian kernel density on a fixed grid across the group's support.
    const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
    const double glo = *mn - 3 * h, ghi = *mx + 3 * h;
    std::vector<double> grid(kCurvePoints), dens(kCurvePoints, 0.0);
    double dmax = 0.0;
    for (int i = 0; i < kCurvePoints; ++i) {
      grid[i] = glo + (ghi - glo) * double(i) / (kCurvePoints - 1);
      for (double v : vals) {
        const double z = (grid[i] - v) / h;
        dens[i] += std::exp(-0.5 * z * z);
      }
      dmax = std::max(dmax, dens[i]);
    }

    // Silhouette: down the right side, back up the left.
    std::string d;
    for (int i = 0; i < kCurvePoints; ++i) {
      const double w = half * dens[i] / dmax;
      d += (i ? " L" : "M") + fmt(cx + w) + " " + fmt(ys(grid[i]));
    }
    for (int i = kCurvePoints - 1; i >= 0; --i) {
      const double w = half * dens[i] / dmax;
      d += " L" + fmt(cx - w) + " " + fmt(ys(grid[i]));
    }
    out += "<path d=\"" + d + " Z\" fill=\"" +
           kPalette[g % kPaletteSize] + "\" fill-opacity=\"0.45\" stroke=\"" +
           kPalette[g % kPaletteSize] + "\"/>\n";

    const double med = median_of(vals);
    out += "<line x1=\"" + fmt(cx - 0.8 * half) + "\" y1=\"" + fmt(ys(med)) +
           "\" x2=\"" + fmt(cx + 0.8 * half) + "\" y2=\"" + fmt(ys(med)) +
           "\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";

    out += "<text x=\"" + fmt(cx) + "\" y=\"" +
           fmt(kHeight - kMarginBottom + 16.0) +
           "\" text-anchor=\"middle\">" + escape(groups[g].label) +
           "</text>\n";
  }

  for (const auto& m : markers) {
    const double py = ys(m.y);
    out += "<line x1=\"" + fmt(kMarginLeft) + "\" y1=\"" + fmt(py) +
           "\" x2=\"" + fmt(kWidth - kMarginRight) + "\" y2=\"" + fmt(py) +
           "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\" "
           "stroke-width=\"1.5\"/>\n";
    out += "<text x=\"" + fmt(kWidth - kMarginRight - 4.0) + "\" y=\"" +
           fmt(py - 5.0) + "\" text-anchor=\"end\" fill=\"#d62728\">" +
           escape(m.label) + "</text>\n";
  }
  return out + "</svg>\n";
}

// ---------------------------------------------------------------------------
// heatmap
// ---------------------------------------------------------------------------

std::string heatmap(const std::string& title,
                    const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels,
                    const std::vector<double>& values) {
  const std::size_t rows = row_labels.size();
  const std::size_t cols = col_labels.size();
  require(rows > 0 && cols > 0, "svg::heatmap", "empty grid");
  require(values.size() == rows * cols, "svg::heatmap",
          "values size does not match labels");

  double absmax = 0.0;
  for (double v : values) {
    require(std::isfinite(v), "svg::heatmap", "non-finite value");
    absmax = std::max(absmax, std::fabs(v));
  }
  if (absmax == 0.0) absmax = 1.0;

  const double scale_w = 56.0;  // room for the color bar on the right
  const double grid_w = kWidth - kMarginLeft - kMarginRight - scale_w;
  const double grid_h = kHeight - kMarginTop - kMarginBottom;
  const double cw = grid_w / double(cols);
  const double ch = grid_h / double(rows);

  std::string out = header() + title_text(title);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = values[r * cols + c];
      out += "<rect x=\"" + fmt(kMarginLeft + cw * double(c)) + "\" y=\"" +
             fmt(kMarginTop + ch * double(r)) + "\" width=\"" + fmt(cw) +
             "\" height=\"" + fmt(ch) + "\" fill=\"" +
             diverging_color(v / absmax) + "\"><title>" + fmt(v) +
             "</title></rect>\n";
    }
    out += "<text x=\"" + fmt(kMarginLeft - 6.0) + "\" y=\"" +
           fmt(kMarginTop + ch * (double(r) + 0.5) + 4.0) +
           "\" text-anchor=\"end\">" + escape(row_labels[r]) + "</text>\n";
  }
  for (std::size_t c = 0; c < cols; ++c) {
    out += "<text x=\"" + fmt(kMarginLeft + cw * (double(c) + 0.5)) +
           "\" y=\"" + fmt(kHeight - kMarginBottom + 16.0) +
           "\" text-anchor=\"middle\" font-size=\"10\">" +
           escape(col_labels[c]) + "</text>\n";
  }

  // Color scale: stacked swatches from +absmax (top) to -absmax (bottom).
  constexpr int kScaleSteps = 32;
  const double bar_x = kWidth - kMarginRight - scale_w + 16.0;
  const double step_h = grid_h / kScaleSteps;
  for (int i = 0; i < kScaleSteps; ++i) {
    const double t = 1.0 - 2.0 * (double(i) + 0.5) / kScaleSteps;
    out += "<rect x=\"" + fmt(bar_x) + "\" y=\"" +
           fmt(kMarginTop + step_h * i) + "\" width=\"14\" height=\"" +
           fmt(step_h + 0.5) + "\" fill=\"" + diverging_color(t) + "\"/>\n";
  }
  out += "<text x=\"" + fmt(bar_x + 18.0) + "\" y=\"" +
         fmt(kMarginTop + 10.0) + "\" font-size=\"10\">" + fmt(absmax) +
         "</text>\n";
  out += "<text x=\"" + fmt(bar_x + 18.0) + "\" y=\"" +
         fmt(kMarginTop + grid_h / 2 + 4.0) + "\" font-size=\"10\">0</text>\n";
  out += "<text x=\"" + fmt(bar_x + 18.0) + "\" y=\"" +
         fmt(kMarginTop + grid_h) + "\" font-size=\"10\">-" + fmt(absmax) +
         "</text>\n";
  return out + "</svg>\n";
}

}  // namespace lagsynth::svg
