#include "lfp/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace lfp {

namespace {

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                               "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  if (std::abs(v) < 1e-12) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Range finished() const {
    if (!(lo <= hi)) return {0.0, 1.0};
    if (lo == hi) {
      const double pad = lo == 0.0 ? 0.5 : 0.1 * std::abs(lo);
      return {lo - pad, hi + pad};
    }
    return *this;
  }
};

class Canvas {
 public:
  Canvas(const PlotOptions& opt, Range x, Range y, double right_margin = 30.0)
      : opt_(opt), x_(x), y_(y), left_(70.0), right_(opt.width - right_margin), top_(40.0),
        bottom_(opt.height - 50.0) {
    out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opt.width) +
            "\" height=\"" + std::to_string(opt.height) + "\" viewBox=\"0 0 " +
            std::to_string(opt.width) + " " + std::to_string(opt.height) + "\">\n";
    out_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opt.title.empty()) {
      out_ += "<text x=\"" + num(0.5 * opt.width) +
              "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(opt.title) +
              "</text>\n";
    }
  }

  double px(double x) const { return left_ + (x - x_.lo) / (x_.hi - x_.lo) * (right_ - left_); }
  double py(double y, const Range& r) const {
    return bottom_ - (y - r.lo) / (r.hi - r.lo) * (bottom_ - top_);
  }
  double py(double y) const { return py(y, y_); }

  double left() const { return left_; }
  double right() const { return right_; }
  double top() const { return top_; }
  double bottom() const { return bottom_; }

  void axes(const std::string& y_label) {
    out_ += "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
    out_ += "<rect x=\"" + num(left_) + "\" y=\"" + num(top_) + "\" width=\"" +
            num(right_ - left_) + "\" height=\"" + num(bottom_ - top_) + "\"/>\n";
    out_ += "</g>\n<g class=\"ticks\" font-size=\"11\">\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = x_.lo + (x_.hi - x_.lo) * i / 4.0;
      const double yv = y_.lo + (y_.hi - y_.lo) * i / 4.0;
      out_ += "<line x1=\"" + num(px(xv)) + "\" y1=\"" + num(bottom_) + "\" x2=\"" +
              num(px(xv)) + "\" y2=\"" + num(bottom_ + 5) + "\" stroke=\"black\"/>\n";
      out_ += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(bottom_ + 18) +
              "\" text-anchor=\"middle\">" + tick_label(xv) + "</text>\n";
      out_ += "<line x1=\"" + num(left_ - 5) + "\" y1=\"" + num(py(yv)) + "\" x2=\"" +
              num(left_) + "\" y2=\"" + num(py(yv)) + "\" stroke=\"black\"/>\n";
      out_ += "<text x=\"" + num(left_ - 8) + "\" y=\"" + num(py(yv) + 4) +
              "\" text-anchor=\"end\">" + tick_label(yv) + "</text>\n";
    }
    out_ += "</g>\n";
    out_ += "<text class=\"x-label\" x=\"" + num(0.5 * (left_ + right_)) + "\" y=\"" +
            num(opt_.height - 12.0) + "\" text-anchor=\"middle\" font-size=\"13\">" +
            escape(opt_.x_label) + "</text>\n";
    out_ += "<text class=\"y-label\" transform=\"translate(16," + num(0.5 * (top_ + bottom_)) +
            ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">" + escape(y_label) +
            "</text>\n";
  }

  void right_axis(const Range& r, const std::string& label, const char* color) {
    out_ += "<g class=\"ticks-right\" font-size=\"11\" fill=\"" + std::string(color) + "\">\n";
    for (int i = 0; i <= 4; ++i) {
      const double yv = r.lo + (r.hi - r.lo) * i / 4.0;
      out_ += "<line x1=\"" + num(right_) + "\" y1=\"" + num(py(yv, r)) + "\" x2=\"" +
              num(right_ + 5) + "\" y2=\"" + num(py(yv, r)) + "\" stroke=\"" + color + "\"/>\n";
      out_ += "<text x=\"" + num(right_ + 8) + "\" y=\"" + num(py(yv, r) + 4) + "\">" +
              tick_label(yv) + "</text>\n";
    }
    out_ += "</g>\n";
    out_ += "<text class=\"y2-label\" transform=\"translate(" + num(opt_.width - 12.0) + "," +
            num(0.5 * (top_ + bottom_)) + ") rotate(90)\" text-anchor=\"middle\" font-size=\"13\">" +
            escape(label) + "</text>\n";
  }

  void series(const Series& s, const char* color, const Range& yr) {
    out_ += "<g class=\"series\">\n";
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.style == Series::Style::line) {
      std::string pts;
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        if (!pts.empty()) pts += ' ';
        pts += num(px(s.x[i])) + "," + num(py(s.y[i], yr));
      }
      if (!pts.empty()) {
        out_ += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        out_ += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" + num(py(s.y[i], yr)) +
                "\" r=\"3\" fill=\"" + color + "\"/>\n";
      }
    }
    out_ += "</g>\n";
  }

  void raw(const std::string& s) { out_ += s; }

  void legend(const std::vector<std::pair<std::string, const char*>>& entries) {
    if (entries.empty()) return;
    out_ += "<g class=\"legend\" font-size=\"12\">\n";
    double y = top_ + 14.0;
    for (const auto& [label, color] : entries) {
      out_ += "<g class=\"legend-entry\"><rect x=\"" + num(left_ + 10) + "\" y=\"" + num(y - 9) +
              "\" width=\"12\" height=\"10\" fill=\"" + color + "\"/><text x=\"" +
              num(left_ + 28) + "\" y=\"" + num(y) + "\">" + escape(label) + "</text></g>\n";
      y += 16.0;
    }
    out_ += "</g>\n";
  }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  const PlotOptions& opt_;
  Range x_;
  Range y_;
  double left_, right_, top_, bottom_;
  std::string out_;
};

const char* color_at(std::size_t i) { return palette[i % (sizeof palette / sizeof *palette)]; }

std::pair<Range, Range> ranges(const std::vector<Series>& series) {
  Range x, y;
  for (const auto& s : series) {
    for (double v : s.x) x.include(v);
    for (double v : s.y) y.include(v);
  }
  return {x.finished(), y.finished()};
}

}  // namespace

std::string line_plot(const std::vector<Series>& series, const PlotOptions& options) {
  auto [xr, yr] = ranges(series);
  if (options.identity_line) {
    const double lo = std::min(xr.lo, yr.lo);
    const double hi = std::max(xr.hi, yr.hi);
    xr = yr = Range{lo, hi};
  }
  Canvas canvas(options, xr, yr);
  canvas.axes(options.y_label);
  if (options.identity_line) {
    canvas.raw("<line class=\"identity\" x1=\"" + num(canvas.px(xr.lo)) + "\" y1=\"" +
               num(canvas.py(yr.lo)) + "\" x2=\"" + num(canvas.px(xr.hi)) + "\" y2=\"" +
               num(canvas.py(yr.hi)) + "\" stroke=\"black\"/>\n");
  }
  std::vector<std::pair<std::string, const char*>> entries;
  for (std::size_t i = 0; i < series.size(); ++i) {
    canvas.series(series[i], color_at(i), yr);
    if (!series[i].label.empty()) entries.emplace_back(series[i].label, color_at(i));
  }
  canvas.legend(entries);
  return canvas.finish();
}

std::string scatter_plot(std::vector<Series> series, const PlotOptions& options) {
  for (auto& s : series) s.style = Series::Style::markers;
  return line_plot(series, options);
}

namespace {

std::string heat_color(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.5, 0.0, 1.0);
  // Blue (low) through white to red (high).
  int r, g, b;
  if (t < 0.5) {
    const double s = t / 0.5;
    r = static_cast<int>(std::lround(59 + s * (255 - 59)));
    g = static_cast<int>(std::lround(76 + s * (255 - 76)));
    b = static_cast<int>(std::lround(192 + s * (255 - 192)));
  } else {
    const double s = (t - 0.5) / 0.5;
    r = static_cast<int>(std::lround(255 - s * (255 - 180)));
    g = static_cast<int>(std::lround(255 - s * (255 - 4)));
    b = static_cast<int>(std::lround(255 - s * (255 - 38)));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string heatmap(const Matrix& values, double x_lo, double x_hi, double y_lo, double y_hi,
                    const PlotOptions& options, const std::vector<Series>& overlay) {
  Range xr{x_lo, x_hi};
  Range yr{y_lo, y_hi};
  xr = xr.finished();
  yr = yr.finished();
  Range vr;
  for (Eigen::Index i = 0; i < values.size(); ++i) vr.include(values.data()[i]);
  vr = vr.finished();

  Canvas canvas(options, xr, yr);
  const Eigen::Index rows = values.rows();
  const Eigen::Index cols = values.cols();
  if (rows > 0 && cols > 0) {
    const double cw = (canvas.right() - canvas.left()) / static_cast<double>(cols);
    const double ch = (canvas.bottom() - canvas.top()) / static_cast<double>(rows);
    std::string cells = "<g class=\"cells\">\n";
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        const double t = (values(i, j) - vr.lo) / (vr.hi - vr.lo);
        cells += "<rect class=\"cell\" x=\"" + num(canvas.left() + j * cw) + "\" y=\"" +
                 num(canvas.bottom() - (i + 1) * ch) + "\" width=\"" + num(cw) + "\" height=\"" +
                 num(ch) + "\" fill=\"" + heat_color(t) + "\"/>\n";
      }
    }
    cells += "</g>\n";
    canvas.raw(cells);
  }
  canvas.axes(options.y_label);
  std::vector<std::pair<std::string, const char*>> entries;
  for (std::size_t i = 0; i < overlay.size(); ++i) {
    Series s = overlay[i];
    s.style = Series::Style::markers;
    canvas.series(s, "#000000", yr);
    if (!s.label.empty()) entries.emplace_back(s.label, "#000000");
  }
  canvas.legend(entries);
  canvas.raw("<text class=\"colorbar\" x=\"" + num(canvas.right()) + "\" y=\"" +
             num(canvas.top() - 8) + "\" text-anchor=\"end\" font-size=\"11\">range [" +
             tick_label(vr.lo) + ", " + tick_label(vr.hi) + "]</text>\n");
  return canvas.finish();
}

std::string dual_axis_plot(const Series& left, const Series& right, const PlotOptions& options,
                           const std::string& right_label) {
  Range xr, ly, ry;
  for (double v : left.x) xr.include(v);
  for (double v : right.x) xr.include(v);
  for (double v : left.y) ly.include(v);
  for (double v : right.y) ry.include(v);
  xr = xr.finished();
  ly = ly.finished();
  ry = ry.finished();

  Canvas canvas(options, xr, ly, 70.0);
  canvas.axes(options.y_label);
  canvas.right_axis(ry, right_label, color_at(1));
  canvas.series(left, color_at(0), ly);
  canvas.series(right, color_at(1), ry);
  std::vector<std::pair<std::string, const char*>> entries;
  if (!left.label.empty()) entries.emplace_back(left.label, color_at(0));
  if (!right.label.empty()) entries.emplace_back(right.label, color_at(1));
  canvas.legend(entries);
  return canvas.finish();
}

}  // namespace lfp
