#include "quadrl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace quadrl {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void include(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (hi <= lo) {
      const double c = lo;
      lo = c - 1.0;
      hi = c + 1.0;
    } else {
      const double margin = 0.05 * (hi - lo);
      lo -= margin;
      hi += margin;
    }
  }
};

Range empty_range() {
  Range r;
  r.lo = std::numeric_limits<double>::infinity();
  r.hi = -std::numeric_limits<double>::infinity();
  return r;
}

// 1/2/5-scaled tick step targeting ~n ticks.
double tick_step(double span, int n) {
  const double raw = span / std::max(n, 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  if (norm <= 1.0) return mag;
  if (norm <= 2.0) return 2.0 * mag;
  if (norm <= 5.0) return 5.0 * mag;
  return 10.0 * mag;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Frame {
  int width, height;
  double left, right, top, bottom;  // margins
  Range xr, yr;

  double px(double x) const {
    return left + (x - xr.lo) / (xr.hi - xr.lo) * (width - left - right);
  }
  double py(double y) const {
    return height - bottom - (y - yr.lo) / (yr.hi - yr.lo) * (height - top - bottom);
  }
};

void draw_axes(std::ostringstream& svg, const Frame& f, const std::string& title,
               const std::string& x_label, const std::string& y_label, bool x_ticks) {
  svg << "<rect x='" << f.left << "' y='" << f.top << "' width='" << (f.width - f.left - f.right)
      << "' height='" << (f.height - f.top - f.bottom)
      << "' fill='none' stroke='#333' stroke-width='1'/>\n";
  if (!title.empty()) {
    svg << "<text x='" << f.width / 2.0 << "' y='" << f.top - 12
        << "' text-anchor='middle' font-size='15' font-family='sans-serif' font-weight='bold'>"
        << escape(title) << "</text>\n";
  }
  if (!x_label.empty()) {
    svg << "<text x='" << (f.left + (f.width - f.left - f.right) / 2.0) << "' y='"
        << f.height - 8 << "' text-anchor='middle' font-size='12' font-family='sans-serif'>"
        << escape(x_label) << "</text>\n";
  }
  if (!y_label.empty()) {
    svg << "<text x='14' y='" << (f.top + (f.height - f.top - f.bottom) / 2.0)
        << "' text-anchor='middle' font-size='12' font-family='sans-serif' transform='rotate(-90 14 "
        << (f.top + (f.height - f.top - f.bottom) / 2.0) << ")'>" << escape(y_label)
        << "</text>\n";
  }
  // y ticks + grid
  const double ystep = tick_step(f.yr.hi - f.yr.lo, 6);
  for (double v = std::ceil(f.yr.lo / ystep) * ystep; v <= f.yr.hi + 1e-12 * ystep; v += ystep) {
    const double y = f.py(v);
    svg << "<line x1='" << f.left << "' y1='" << y << "' x2='" << (f.width - f.right) << "' y2='"
        << y << "' stroke='#ddd' stroke-width='0.5'/>\n";
    svg << "<text x='" << f.left - 6 << "' y='" << y + 4
        << "' text-anchor='end' font-size='11' font-family='sans-serif'>" << fmt(v)
        << "</text>\n";
  }
  if (x_ticks) {
    const double xstep = tick_step(f.xr.hi - f.xr.lo, 7);
    for (double v = std::ceil(f.xr.lo / xstep) * xstep; v <= f.xr.hi + 1e-12 * xstep;
         v += xstep) {
      const double x = f.px(v);
      svg << "<line x1='" << x << "' y1='" << (f.height - f.bottom) << "' x2='" << x << "' y2='"
          << (f.height - f.bottom + 4) << "' stroke='#333' stroke-width='1'/>\n";
      svg << "<text x='" << x << "' y='" << (f.height - f.bottom + 16)
          << "' text-anchor='middle' font-size='11' font-family='sans-serif'>" << fmt(v)
          << "</text>\n";
    }
  }
}

}  // namespace

std::string LineChart::render() const {
  Frame f{width, height, 58, 16, 34, 42, empty_range(), empty_range()};
  for (const auto& s : series) {
    for (double v : s.x) f.xr.include(v);
    for (double v : s.y) f.yr.include(v);
  }
  for (const auto& b : bands) {
    for (double v : b.x) f.xr.include(v);
    for (double v : b.lo) f.yr.include(v);
    for (double v : b.hi) f.yr.include(v);
  }
  if (!std::isfinite(f.xr.lo)) f.xr = Range{0.0, 1.0};
  if (!std::isfinite(f.yr.lo)) f.yr = Range{0.0, 1.0};
  f.xr.pad();
  f.yr.pad();

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' viewBox='0 0 " << width << ' ' << height << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n";
  draw_axes(svg, f, title, x_label, y_label, true);

  for (std::size_t i = 0; i < bands.size(); ++i) {
    const Band& b = bands[i];
    if (b.x.empty()) continue;
    const std::string color =
        b.color.empty() ? kPalette[i % kPaletteSize] : b.color;
    svg << "<polygon fill='" << color << "' fill-opacity='0.18' stroke='none' points='";
    for (std::size_t k = 0; k < b.x.size(); ++k) svg << f.px(b.x[k]) << ',' << f.py(b.hi[k]) << ' ';
    for (std::size_t k = b.x.size(); k-- > 0;) svg << f.px(b.x[k]) << ',' << f.py(b.lo[k]) << ' ';
    svg << "'/>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    if (s.x.empty()) continue;
    const std::string color = s.color.empty() ? kPalette[i % kPaletteSize] : s.color;
    svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.6' points='";
    for (std::size_t k = 0; k < s.x.size(); ++k) svg << f.px(s.x[k]) << ',' << f.py(s.y[k]) << ' ';
    svg << "'/>\n";
  }
  // legend
  double ly = f.top + 14;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    if (s.label.empty()) continue;
    const std::string color = s.color.empty() ? kPalette[i % kPaletteSize] : s.color;
    const double lx = width - f.right - 150;
    svg << "<line x1='" << lx << "' y1='" << ly - 4 << "' x2='" << lx + 22 << "' y2='" << ly - 4
        << "' stroke='" << color << "' stroke-width='2'/>\n";
    svg << "<text x='" << lx + 28 << "' y='" << ly
        << "' font-size='12' font-family='sans-serif'>" << escape(s.label) << "</text>\n";
    ly += 16;
  }
  svg << "</svg>\n";
  return svg.str();
}

void LineChart::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("svg: cannot open " + path.string() + " for writing");
  out << render();
}

std::string BoxChart::render() const {
  Frame f{width, height, 58, 16, 34, 42, Range{0.0, 1.0}, empty_range()};
  for (const auto& b : boxes) {
    f.yr.include(b.whisker_lo);
    f.yr.include(b.whisker_hi);
    for (double v : b.outliers) f.yr.include(v);
  }
  if (!std::isfinite(f.yr.lo)) f.yr = Range{0.0, 1.0};
  f.yr.pad();

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' viewBox='0 0 " << width << ' ' << height << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n";
  draw_axes(svg, f, title, "", y_label, false);

  const double plot_w = width - f.left - f.right;
  const double slot = plot_w / std::max<std::size_t>(boxes.size(), 1);
  const double box_w = 0.45 * slot;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const BoxStats& b = boxes[i];
    const double cx = f.left + slot * (static_cast<double>(i) + 0.5);
    const std::string color = kPalette[i % kPaletteSize];
    // whiskers
    svg << "<line x1='" << cx << "' y1='" << f.py(b.whisker_lo) << "' x2='" << cx << "' y2='"
        << f.py(b.q1) << "' stroke='#333' stroke-width='1'/>\n";
    svg << "<line x1='" << cx << "' y1='" << f.py(b.q3) << "' x2='" << cx << "' y2='"
        << f.py(b.whisker_hi) << "' stroke='#333' stroke-width='1'/>\n";
    for (double w : {b.whisker_lo, b.whisker_hi}) {
      svg << "<line x1='" << cx - box_w / 4 << "' y1='" << f.py(w) << "' x2='" << cx + box_w / 4
          << "' y2='" << f.py(w) << "' stroke='#333' stroke-width='1'/>\n";
    }
    // box + median
    svg << "<rect x='" << cx - box_w / 2 << "' y='" << f.py(b.q3) << "' width='" << box_w
        << "' height='" << std::max(f.py(b.q1) - f.py(b.q3), 0.5) << "' fill='" << color
        << "' fill-opacity='0.35' stroke='" << color << "' stroke-width='1.3'/>\n";
    svg << "<line x1='" << cx - box_w / 2 << "' y1='" << f.py(b.median) << "' x2='"
        << cx + box_w / 2 << "' y2='" << f.py(b.median) << "' stroke='" << color
        << "' stroke-width='2'/>\n";
    for (double o : b.outliers) {
      svg << "<circle cx='" << cx << "' cy='" << f.py(o)
          << "' r='2.2' fill='none' stroke='#555' stroke-width='1'/>\n";
    }
    svg << "<text x='" << cx << "' y='" << (height - f.bottom + 16)
        << "' text-anchor='middle' font-size='12' font-family='sans-serif'>" << escape(b.label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void BoxChart::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("svg: cannot open " + path.string() + " for writing");
  out << render();
}

}  // namespace quadrl
