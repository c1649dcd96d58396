#pragma once

#include <optional>
#include <vector>

namespace quadrl {

// Step-response analysis of a sampled trajectory. values[k] is the response
// at time (k + 1) * dt — one sample after each control step, with the step
// applied at t = 0 from the initial condition.

// Time of the last sample observed outside the +-band_fraction *
// |step_magnitude| band around the target; the response stays inside the band
// strictly after it. 0 when no sample ever leaves the band; nullopt when the
// final sample is still outside (the response never settles).
std::optional<double> settling_time(const std::vector<double>& values, double dt, double target,
                                    double step_magnitude, double band_fraction = 0.02);

// Peak excursion beyond the target in the direction of the step, as a
// percentage of the step magnitude; 0 for responses that never cross the
// target. initial == target has no step direction; the result is 0 with the
// degenerate flag set.
struct OvershootResult {
  double percent = 0.0;
  bool degenerate_step = false;
};

OvershootResult overshoot_percent(const std::vector<double>& values, double initial,
                                  double target);

// Mean absolute error over the trailing window_seconds of the trajectory.
// The signal must cover the window; shorter signals are invalid input.
double steady_state_error(const std::vector<double>& values, double dt, double target,
                          double window_seconds = 1.0);

// Linear-interpolation quantile (the common spreadsheet/NumPy default) on a
// sorted sample: h = (n-1)p, result = x[floor(h)] + frac(h) * (x[floor(h)+1]
// - x[floor(h)]).
double quantile_sorted(const std::vector<double>& sorted_values, double p);

struct SummaryStats {
  int n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by n)
  double min = 0.0;
  double max = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  std::vector<double> outlier_values;  // outside [q1 - 1.5*iqr, q3 + 1.5*iqr]
};

SummaryStats summarize_values(std::vector<double> values);

}  // namespace quadrl
