#include "quadrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quadrl {

std::optional<double> settling_time(const std::vector<double>& values, double dt, double target,
                                    double step_magnitude, double band_fraction) {
  if (values.empty()) throw std::invalid_argument("settling_time: empty trajectory");
  if (!(dt > 0.0)) throw std::invalid_argument("settling_time: dt must be > 0");
  const double band = band_fraction * std::abs(step_magnitude);
  int last_violation = -1;
  for (int k = static_cast<int>(values.size()) - 1; k >= 0; --k) {
    if (std::abs(values[static_cast<std::size_t>(k)] - target) > band) {
      last_violation = k;
      break;
    }
  }
  if (last_violation == static_cast<int>(values.size()) - 1) return std::nullopt;
  return dt * static_cast<double>(last_violation + 1);
}

OvershootResult overshoot_percent(const std::vector<double>& values, double initial,
                                  double target) {
  if (values.empty()) throw std::invalid_argument("overshoot_percent: empty trajectory");
  const double step = target - initial;
  if (step == 0.0) return {0.0, true};
  const double direction = step > 0.0 ? 1.0 : -1.0;
  double peak = 0.0;
  for (double y : values) peak = std::max(peak, direction * (y - target));
  return {100.0 * peak / std::abs(step), false};
}

double steady_state_error(const std::vector<double>& values, double dt, double target,
                          double window_seconds) {
  if (values.empty()) throw std::invalid_argument("steady_state_error: empty trajectory");
  if (!(dt > 0.0)) throw std::invalid_argument("steady_state_error: dt must be > 0");
  const auto n = values.size();
  std::size_t window = static_cast<std::size_t>(std::llround(window_seconds / dt));
  if (window < 1) window = 1;
  if (window > n) {
    throw std::invalid_argument("steady_state_error: window longer than signal");
  }
  double sum = 0.0;
  for (std::size_t k = n - window; k < n; ++k) sum += std::abs(values[k] - target);
  return sum / static_cast<double>(window);
}

double quantile_sorted(const std::vector<double>& sorted_values, double p) {
  if (sorted_values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile: p outside [0, 1]");
  const double h = static_cast<double>(sorted_values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted_values.size()) return sorted_values.back();
  return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

SummaryStats summarize_values(std::vector<double> values) {
  SummaryStats s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  s.q1 = quantile_sorted(values, 0.25);
  s.median = quantile_sorted(values, 0.5);
  s.q3 = quantile_sorted(values, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo = s.q1 - 1.5 * iqr;
  const double hi = s.q3 + 1.5 * iqr;
  for (double v : values) {
    if (v < lo || v > hi) s.outlier_values.push_back(v);
  }
  return s;
}

}  // namespace quadrl
