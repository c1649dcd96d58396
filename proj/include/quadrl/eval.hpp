#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "quadrl/metrics.hpp"
#include "quadrl/policy.hpp"
#include "quadrl/train.hpp"

namespace quadrl {

// Wraps an angle difference into (-pi, pi].
double wrap_angle(double angle);

inline constexpr std::array<const char*, 4> kChannelNames = {"x", "y", "z", "yaw"};

// Raw material of one evaluation trial: the four response channels sampled
// after every control step (x, y, z track their targets; yaw is the wrapped
// yaw error tracking 0), the actions taken, and how the episode ended.
// Analysis is separated from trajectory generation so synthetic traces
// (scripted controllers, test doubles) go through the same code path.
struct TrialTrace {
  double dt = 0.01;
  QuadrotorState initial_state;
  HoverTarget target;
  std::array<std::vector<double>, 4> channels;      // x, y, z, yaw error
  std::vector<std::array<double, 4>> actions;       // one row per step
  std::vector<StepRecord> records;                  // full per-step log
  bool failed = false;                               // failure termination
  std::optional<TerminationReason> failure_reason;
  double total_reward = 0.0;

  double duration() const { return dt * static_cast<double>(channels[0].size()); }
};

struct ChannelMetrics {
  std::string channel;
  double initial = 0.0;
  double target = 0.0;
  double step_magnitude = 0.0;
  std::optional<double> settling_time;       // s; nullopt = never settled
  double overshoot = 0.0;                    // % of step magnitude
  bool degenerate_step = false;              // initial == target
  double steady_state_abs = 0.0;             // m or rad
  std::optional<double> steady_state_percent;  // % of step; nullopt if degenerate
};

struct TrialReport {
  int trial_index = 0;
  std::uint64_t seed = 0;
  QuadrotorState initial_state;
  bool success = false;  // ran the full horizon without failure termination
  std::optional<TerminationReason> failure_reason;
  double duration = 0.0;
  double total_reward = 0.0;
  std::array<ChannelMetrics, 4> channels;
  std::string trajectory_ref;  // CSV path when trajectories are written
};

// Step-response metrics for all four channels of one trace. Settling and
// steady-state error need the full horizon to be meaningful, so they are
// reported as undefined (nullopt / NaN-free zero) for failed trials shorter
// than the steady-state window.
TrialReport analyze_trial(const TrialTrace& trace, double band_fraction = 0.02,
                          double sse_window_seconds = 1.0);

// Runs the deterministic policy (tanh of the actor mean, no sampling) in the
// noise-enabled environment from random initial states. Trial i uses the
// stream mix_seed(seed, i) for both initial state and observation noise, so
// different policies evaluated with the same seed face identical conditions.
// horizon_seconds > 0 overrides the bundle's episode horizon.
std::vector<TrialReport> run_trials(const PolicyParameters& policy, const EnvBundle& bundle,
                                    int n_trials, std::uint64_t seed,
                                    double horizon_seconds = 0.0,
                                    std::vector<TrialTrace>* traces = nullptr);

// Distribution of one metric across trials. Trials where the metric is
// undefined (unsettled, degenerate step, trial too short) are counted, not
// silently dropped.
struct MetricDistribution {
  SummaryStats stats;
  int undefined = 0;
};

struct ChannelSummary {
  std::string channel;
  MetricDistribution settling;      // s, over settled trials
  MetricDistribution overshoot;     // %
  MetricDistribution steady_state;  // % of step magnitude
  // Settling with unsettled/failed trials mapped to the horizon, for
  // cross-policy ordering comparisons where dropping them would flatter a
  // policy that crashes.
  SummaryStats settling_horizon_mapped;
  double fraction_within_band = 0.0;    // steady-state percent <= 100*band
  double fraction_zero_overshoot = 0.0;
  int unsettled = 0;
};

struct EvalSummary {
  int trials = 0;
  int failures = 0;
  double horizon_seconds = 0.0;
  std::array<ChannelSummary, 4> channels;
};

EvalSummary summarize(const std::vector<TrialReport>& reports, double horizon_seconds,
                      double band_fraction = 0.02);

}  // namespace quadrl
