#include "quadrl/eval.hpp"

#include <cmath>

namespace quadrl {

double wrap_angle(double angle) {
  double a = std::fmod(angle, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

TrialReport analyze_trial(const TrialTrace& trace, double band_fraction,
                          double sse_window_seconds) {
  TrialReport report;
  report.initial_state = trace.initial_state;
  report.success = !trace.failed;
  report.failure_reason = trace.failure_reason;
  report.duration = trace.duration();
  report.total_reward = trace.total_reward;

  const double target_yaw = euler_from_quaternion(trace.target.attitude).z();
  const std::array<double, 4> initials = {
      trace.initial_state.position.x(), trace.initial_state.position.y(),
      trace.initial_state.position.z(),
      wrap_angle(euler_from_quaternion(trace.initial_state.attitude).z() - target_yaw)};
  const std::array<double, 4> targets = {trace.target.position.x(), trace.target.position.y(),
                                         trace.target.position.z(), 0.0};

  for (int c = 0; c < 4; ++c) {
    ChannelMetrics& m = report.channels[static_cast<std::size_t>(c)];
    m.channel = kChannelNames[static_cast<std::size_t>(c)];
    m.initial = initials[static_cast<std::size_t>(c)];
    m.target = targets[static_cast<std::size_t>(c)];
    m.step_magnitude = std::abs(m.target - m.initial);
    const auto& values = trace.channels[static_cast<std::size_t>(c)];
    if (values.empty()) continue;

    const OvershootResult os = overshoot_percent(values, m.initial, m.target);
    m.overshoot = os.percent;
    m.degenerate_step = os.degenerate_step;

    // A trial that crashed early never settles, and a steady-state window
    // extending past the data would be meaningless.
    if (!trace.failed) {
      m.settling_time = settling_time(values, trace.dt, m.target, m.step_magnitude,
                                      band_fraction);
    }
    if (trace.duration() >= sse_window_seconds) {
      m.steady_state_abs = steady_state_error(values, trace.dt, m.target, sse_window_seconds);
      if (!m.degenerate_step) {
        m.steady_state_percent = 100.0 * m.steady_state_abs / m.step_magnitude;
      }
    }
  }
  return report;
}

std::vector<TrialReport> run_trials(const PolicyParameters& policy, const EnvBundle& bundle,
                                    int n_trials, std::uint64_t seed, double horizon_seconds,
                                    std::vector<TrialTrace>* traces) {
  EnvBundle b = bundle;
  if (horizon_seconds > 0.0) b.termination.episode_horizon = horizon_seconds;

  std::vector<TrialReport> reports;
  reports.reserve(static_cast<std::size_t>(n_trials));
  if (traces) {
    traces->clear();
    traces->reserve(static_cast<std::size_t>(n_trials));
  }

  for (int i = 0; i < n_trials; ++i) {
    const std::uint64_t trial_seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    QuadrotorEnv env = b.make_env(trial_seed);
    Observation obs = env.reset();

    TrialTrace trace;
    trace.dt = b.options.control_dt;
    trace.initial_state = env.state();
    trace.target = b.target;
    const double target_yaw = euler_from_quaternion(b.target.attitude).z();
    if (traces) {
      env.set_step_logger([&trace](const StepRecord& r) { trace.records.push_back(r); });
    }

    while (!env.done()) {
      const Eigen::Vector4d action = deterministic_action(policy, obs);
      const StepOutcome out = env.step(action);
      obs = out.observation;
      const QuadrotorState& s = env.state();
      trace.channels[0].push_back(s.position.x());
      trace.channels[1].push_back(s.position.y());
      trace.channels[2].push_back(s.position.z());
      trace.channels[3].push_back(
          wrap_angle(euler_from_quaternion(s.attitude).z() - target_yaw));
      trace.actions.push_back({action[0], action[1], action[2], action[3]});
      trace.total_reward += out.reward;
      if (out.terminated) {
        trace.failed = true;
        trace.failure_reason = out.reason;
      }
    }

    TrialReport report = analyze_trial(trace);
    report.trial_index = i;
    report.seed = trial_seed;
    reports.push_back(std::move(report));
    if (traces) traces->push_back(std::move(trace));
  }
  return reports;
}

namespace {

MetricDistribution distribution(const std::vector<double>& defined, int total) {
  MetricDistribution d;
  d.stats = summarize_values(defined);
  d.undefined = total - static_cast<int>(defined.size());
  return d;
}

}  // namespace

EvalSummary summarize(const std::vector<TrialReport>& reports, double horizon_seconds,
                      double band_fraction) {
  EvalSummary summary;
  summary.trials = static_cast<int>(reports.size());
  summary.horizon_seconds = horizon_seconds;
  for (const auto& report : reports) {
    if (!report.success) ++summary.failures;
  }

  for (int c = 0; c < 4; ++c) {
    ChannelSummary& ch = summary.channels[static_cast<std::size_t>(c)];
    ch.channel = kChannelNames[static_cast<std::size_t>(c)];

    std::vector<double> settling, settling_mapped, overshoot, sse;
    int zero_overshoot = 0, within_band = 0;
    for (const auto& report : reports) {
      const ChannelMetrics& m = report.channels[static_cast<std::size_t>(c)];
      if (m.settling_time) {
        settling.push_back(*m.settling_time);
        settling_mapped.push_back(*m.settling_time);
      } else {
        settling_mapped.push_back(horizon_seconds);
        ++ch.unsettled;
      }
      if (!m.degenerate_step) {
        overshoot.push_back(m.overshoot);
        if (m.overshoot == 0.0) ++zero_overshoot;
      }
      if (m.steady_state_percent) {
        sse.push_back(*m.steady_state_percent);
        if (*m.steady_state_percent <= 100.0 * band_fraction) ++within_band;
      }
    }

    ch.settling = distribution(settling, summary.trials);
    ch.overshoot = distribution(overshoot, summary.trials);
    ch.steady_state = distribution(sse, summary.trials);
    ch.settling_horizon_mapped = summarize_values(settling_mapped);
    if (summary.trials > 0) {
      ch.fraction_zero_overshoot = static_cast<double>(zero_overshoot) / summary.trials;
      ch.fraction_within_band = static_cast<double>(within_band) / summary.trials;
    }
  }
  return summary;
}

}  // namespace quadrl
