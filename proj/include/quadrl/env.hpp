#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include <Eigen/Core>

#include "quadrl/dynamics.hpp"
#include "quadrl/quat.hpp"
#include "quadrl/rng.hpp"

namespace quadrl {

// Observation layout, 17 entries:
//   [0..2]   position error (m)
//   [3..6]   error quaternion (x, y, z, w)
//   [7..9]   linear velocity (m/s, inertial)
//   [10..12] angular velocity (rad/s, body)
//   [13..16] previous action in [-1, 1]^4
using Observation = Eigen::Matrix<double, 17, 1>;

constexpr int kObservationDim = 17;
constexpr int kActionDim = 4;

// Gaussian noise standard deviations applied to the observation entries.
// The previous action is always passed through untouched.
struct ObservationSpec {
  double sigma_position = 1e-3;
  double sigma_quaternion = 2e-3;
  double sigma_velocity = 1e-3;
  double sigma_body_rates = 2e-3;

  void validate() const;
};

// One reward term of the form alpha*exp(-delta_alpha*e^2) +
// beta*exp(-delta_beta*e^2). A single-bandwidth term is alpha = 1, beta = 0.
// The wide component (small delta) shapes the early transient, the narrow
// component (large delta) rewards steady-state accuracy.
struct RewardBandwidth {
  double alpha = 1.0;
  double beta = 0.0;
  double delta_alpha = 1.0;
  double delta_beta = 1.0;

  double evaluate(double error_sq) const {
    return alpha * std::exp(-delta_alpha * error_sq) +
           beta * std::exp(-delta_beta * error_sq);
  }
};

// Multi-component shaped reward:
//   R = survival + w_xy*xy_term + w_z*z_term + w_velocity*exp(-delta_v*|v|^2)
//       + w_geodesic*geo_term - w_smoothness*|a_t - a_prev|^2
struct RewardSpec {
  double survival = 0.05;
  double w_xy = 0.25;
  double w_z = 0.25;
  double w_velocity = 0.1;
  double w_geodesic = 0.15;
  double w_smoothness = 0.1;
  RewardBandwidth xy{0.6, 0.4, 0.5, 20.0};
  RewardBandwidth z{1.0, 0.0, 4.0, 1.0};
  double delta_velocity = 1.0;
  RewardBandwidth geodesic{1.0, 0.0, 0.5, 1.0};

  static RewardSpec baseline();
  static RewardSpec acrobatic();
  static RewardSpec inspection();

  void validate() const;
};

// Episode failure bounds plus the time horizon. Attitude is bounded either by
// the geodesic angle or by separate roll/pitch limits, never both.
struct TerminationSpec {
  double min_altitude = 0.1;        // m
  double max_position_error = 3.0;  // m
  std::optional<double> max_geodesic_angle;  // rad
  std::optional<double> max_roll;            // rad
  std::optional<double> max_pitch;           // rad
  double max_velocity = 0.8;   // m/s
  double max_body_rate = 0.0;  // rad/s
  double episode_horizon = 10.0;  // s

  static TerminationSpec baseline();
  static TerminationSpec acrobatic();
  static TerminationSpec inspection();

  void validate() const;
};

enum class TerminationReason {
  altitude,
  position_error,
  geodesic_angle,
  roll,
  pitch,
  velocity,
  body_rate,
};

const char* to_string(TerminationReason reason);

struct EpisodeStatus {
  bool terminated = false;
  bool truncated = false;
  std::optional<TerminationReason> reason;

  bool done() const { return terminated || truncated; }
};

struct RewardBreakdown {
  double survival = 0.0;
  double xy = 0.0;
  double z = 0.0;
  double velocity = 0.0;
  double geodesic = 0.0;
  double smoothness_penalty = 0.0;  // stored positive, enters negatively

  double total() const {
    return survival + xy + z + velocity + geodesic - smoothness_penalty;
  }
};

struct StepOutcome {
  Observation observation = Observation::Zero();
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  std::optional<TerminationReason> reason;
  RewardBreakdown breakdown;
};

// One entry of the optional per-step trajectory log.
struct StepRecord {
  double t = 0.0;                                  // elapsed time after the step
  QuadrotorState state;                            // true post-step state
  Eigen::Vector4d action = Eigen::Vector4d::Zero();  // clamped action applied
  RewardBreakdown reward;
  bool terminated = false;
  bool truncated = false;
};

using StepLogger = std::function<void(const StepRecord&)>;

// Setpoint to stabilize at; the attitude target is the identity (level hover,
// zero yaw) unless configured otherwise.
struct HoverTarget {
  Eigen::Vector3d position{0.0, 0.0, 1.0};
  Quat attitude = Quat::identity();
};

// Reset distribution: uniform positions and attitude, rest start.
struct InitSpec {
  double xy_half_range = 2.0;                  // x0, y0 in [-r, r]
  double z_min = 0.0;                          // m
  double z_max = 2.0;                          // m
  double max_roll_pitch = 15.0 * M_PI / 180.0;  // rad

  void validate() const;
};

// Linear map from normalized actions to motor speeds:
// rpm_i = hover_rpm * (1 + a_i/2), clipped to [0, max_rpm]. Actions slightly
// outside [-1, 1] are clamped, since a squashed policy can emit boundary
// values.
MotorCommand action_to_rpm(const Eigen::Vector4d& action, const QuadrotorParams& params);

// Reward on the true (noise-free) state; noise only ever enters observations.
RewardBreakdown compute_reward(const QuadrotorState& state, const HoverTarget& target,
                               const Eigen::Vector4d& action,
                               const Eigen::Vector4d& previous_action,
                               const RewardSpec& spec);

// Bound checks in a fixed priority order (altitude, position error, attitude,
// velocity, body rate), then the horizon.
EpisodeStatus check_termination(const QuadrotorState& state, const HoverTarget& target,
                                const TerminationSpec& spec, double elapsed_seconds);

Observation make_observation(const QuadrotorState& state, const HoverTarget& target,
                             const Eigen::Vector4d& previous_action,
                             const ObservationSpec& spec, RngStream& rng);

QuadrotorState sample_initial_state(const InitSpec& init, RngStream& rng);

struct EnvOptions {
  double control_dt = 0.01;   // s, 100 Hz interaction loop
  int physics_substeps = 5;   // RK4 sub-steps per control step (500 Hz physics)

  void validate() const;
};

// The POMDP environment. One instance is single-threaded; independent
// instances share only immutable specs and may run concurrently.
class QuadrotorEnv {
 public:
  QuadrotorEnv(const QuadrotorParams& params, const RewardSpec& reward,
               const TerminationSpec& termination, const ObservationSpec& observation,
               const InitSpec& init, const HoverTarget& target, const EnvOptions& options,
               std::uint64_t seed);

  // Samples a fresh initial state and returns the first observation.
  Observation reset();

  // Restarts the episode from a caller-provided state (exact hover starts,
  // scripted scenarios).
  Observation reset_to(const QuadrotorState& state);

  // Advances one control step: action -> RPM, physics_substeps RK4 steps,
  // reward with the stored previous action, termination check, observation.
  // Throws std::logic_error when called on a finished episode.
  StepOutcome step(const Eigen::Vector4d& action);

  const QuadrotorState& state() const { return state_; }
  const Eigen::Vector4d& previous_action() const { return previous_action_; }
  double elapsed() const { return static_cast<double>(step_count_) * options_.control_dt; }
  int step_count() const { return step_count_; }
  bool done() const { return done_; }

  const QuadrotorParams& params() const { return params_; }
  const RewardSpec& reward_spec() const { return reward_; }
  const TerminationSpec& termination_spec() const { return termination_; }
  const HoverTarget& target() const { return target_; }
  const EnvOptions& options() const { return options_; }

  // Called once per step with the applied action and true post-step state;
  // pass an empty function to disable.
  void set_step_logger(StepLogger logger) { logger_ = std::move(logger); }

 private:
  QuadrotorParams params_;
  RewardSpec reward_;
  TerminationSpec termination_;
  ObservationSpec observation_;
  InitSpec init_;
  HoverTarget target_;
  EnvOptions options_;
  RngStream rng_;

  QuadrotorState state_;
  Eigen::Vector4d previous_action_ = Eigen::Vector4d::Zero();
  StepLogger logger_;
  int step_count_ = 0;
  bool done_ = false;
  bool needs_reset_ = true;
};

}  // namespace quadrl
