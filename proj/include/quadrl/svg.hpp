#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace quadrl {

// Minimal native SVG charts. CSV/JSON outputs are the machine-readable
// record; these exist so runs produce directly viewable figures without any
// plotting stack.

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;  // empty: palette color by index
};

// Shaded vertical extent (e.g. min..max across seeds) behind the lines.
struct Band {
  std::vector<double> x;
  std::vector<double> lo;
  std::vector<double> hi;
  std::string color;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<Band> bands;
  int width = 860;
  int height = 480;

  std::string render() const;
  void write(const std::filesystem::path& path) const;
};

// One box: whisker ends already resolved by the caller (most extreme values
// inside the 1.5*IQR fences), outliers drawn as dots.
struct BoxStats {
  std::string label;
  double whisker_lo = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_hi = 0.0;
  std::vector<double> outliers;
};

struct BoxChart {
  std::string title;
  std::string y_label;
  std::vector<BoxStats> boxes;
  int width = 560;
  int height = 420;

  std::string render() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace quadrl
