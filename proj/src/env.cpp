#include "quadrl/env.hpp"

#include <cmath>
#include <stdexcept>

#include "quadrl/errors.hpp"

namespace quadrl {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
// Slack for horizon comparison against float-accumulated elapsed time; three
// orders of magnitude below any sensible control period.
constexpr double kHorizonSlack = 1e-9;
}  // namespace

void ObservationSpec::validate() const {
  if (sigma_position < 0.0 || sigma_quaternion < 0.0 || sigma_velocity < 0.0 ||
      sigma_body_rates < 0.0) {
    throw ConfigError("observation: noise sigmas must be >= 0");
  }
}

RewardSpec RewardSpec::baseline() {
  RewardSpec s;
  s.survival = 0.05;
  s.w_xy = 0.25;
  s.w_z = 0.25;
  s.w_velocity = 0.1;
  s.w_geodesic = 0.15;
  s.w_smoothness = 0.1;
  s.xy = {0.6, 0.4, 0.5, 20.0};
  s.z = {1.0, 0.0, 4.0, 1.0};
  s.delta_velocity = 1.0;
  s.geodesic = {1.0, 0.0, 0.5, 1.0};
  return s;
}

RewardSpec RewardSpec::acrobatic() {
  RewardSpec s = baseline();
  s.w_velocity = 0.08;
  s.xy = {0.6, 0.4, 4.0, 20.0};
  s.delta_velocity = 0.5;
  return s;
}

RewardSpec RewardSpec::inspection() {
  RewardSpec s;
  s.survival = 0.01;
  s.w_xy = 0.25;
  s.w_z = 0.25;
  s.w_velocity = 0.15;
  s.w_geodesic = 0.2;
  s.w_smoothness = 0.02;
  s.xy = {0.6, 0.4, 4.0, 150.0};
  s.z = {0.6, 0.4, 4.0, 150.0};
  s.delta_velocity = 1.5;
  s.geodesic = {0.6, 0.4, 0.5, 150.0};
  return s;
}

namespace {
void validate_bandwidth(const RewardBandwidth& b, const char* name) {
  if (b.alpha < 0.0 || b.beta < 0.0) {
    throw ConfigError(std::string("reward: ") + name + " coefficients must be >= 0");
  }
  if (std::abs(b.alpha + b.beta - 1.0) > 1e-12) {
    throw ConfigError(std::string("reward: ") + name + " coefficients must sum to 1");
  }
  if (!(b.delta_alpha > 0.0) || !(b.delta_beta > 0.0)) {
    throw ConfigError(std::string("reward: ") + name + " bandwidths must be > 0");
  }
}
}  // namespace

void RewardSpec::validate() const {
  if (w_xy < 0.0 || w_z < 0.0 || w_velocity < 0.0 || w_geodesic < 0.0 ||
      w_smoothness < 0.0) {
    throw ConfigError("reward: weights must be >= 0");
  }
  validate_bandwidth(xy, "xy");
  validate_bandwidth(z, "z");
  validate_bandwidth(geodesic, "geodesic");
  if (!(delta_velocity > 0.0)) {
    throw ConfigError("reward: velocity bandwidth must be > 0");
  }
}

TerminationSpec TerminationSpec::baseline() {
  TerminationSpec s;
  s.min_altitude = 0.1;
  s.max_position_error = 3.0;
  s.max_geodesic_angle = M_PI;
  s.max_velocity = 0.8;
  s.max_body_rate = 530.0 * kDegToRad;
  s.episode_horizon = 10.0;
  return s;
}

TerminationSpec TerminationSpec::acrobatic() {
  TerminationSpec s = baseline();
  s.max_velocity = 1.0;
  return s;
}

TerminationSpec TerminationSpec::inspection() {
  TerminationSpec s;
  s.min_altitude = 0.1;
  s.max_position_error = 3.0;
  s.max_geodesic_angle.reset();
  s.max_roll = 15.0 * kDegToRad;
  s.max_pitch = 15.0 * kDegToRad;
  s.max_velocity = 0.2;
  s.max_body_rate = 115.0 * kDegToRad;
  s.episode_horizon = 10.0;
  return s;
}

void TerminationSpec::validate() const {
  if (!(min_altitude > 0.0) || !(max_position_error > 0.0) || !(max_velocity > 0.0) ||
      !(max_body_rate > 0.0) || !(episode_horizon > 0.0)) {
    throw ConfigError("termination: bounds must be > 0");
  }
  const bool has_geodesic = max_geodesic_angle.has_value();
  const bool has_euler = max_roll.has_value() && max_pitch.has_value();
  if (max_roll.has_value() != max_pitch.has_value()) {
    throw ConfigError("termination: roll and pitch bounds must be set together");
  }
  if (has_geodesic == has_euler) {
    throw ConfigError(
        "termination: exactly one of geodesic-angle or roll/pitch bounds must be set");
  }
  if (has_geodesic && !(*max_geodesic_angle > 0.0)) {
    throw ConfigError("termination: geodesic bound must be > 0");
  }
  if (has_euler && (!(*max_roll > 0.0) || !(*max_pitch > 0.0))) {
    throw ConfigError("termination: roll/pitch bounds must be > 0");
  }
}

const char* to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::altitude: return "altitude";
    case TerminationReason::position_error: return "position_error";
    case TerminationReason::geodesic_angle: return "geodesic_angle";
    case TerminationReason::roll: return "roll";
    case TerminationReason::pitch: return "pitch";
    case TerminationReason::velocity: return "velocity";
    case TerminationReason::body_rate: return "body_rate";
  }
  return "unknown";
}

void InitSpec::validate() const {
  if (xy_half_range < 0.0 || z_min < 0.0 || z_max < z_min || max_roll_pitch < 0.0) {
    throw ConfigError("init: invalid reset ranges");
  }
}

void EnvOptions::validate() const {
  if (!(control_dt > 0.0)) throw ConfigError("env: control_dt must be > 0");
  if (physics_substeps < 1) throw ConfigError("env: physics_substeps must be >= 1");
}

MotorCommand action_to_rpm(const Eigen::Vector4d& action, const QuadrotorParams& params) {
  const double hover = params.hover_rpm();
  MotorCommand cmd;
  for (int i = 0; i < 4; ++i) {
    const double a = std::clamp(action[i], -1.0, 1.0);
    cmd.rpm[i] = std::clamp(hover * (1.0 + a / 2.0), 0.0, params.max_rpm);
  }
  return cmd;
}

RewardBreakdown compute_reward(const QuadrotorState& state, const HoverTarget& target,
                               const Eigen::Vector4d& action,
                               const Eigen::Vector4d& previous_action,
                               const RewardSpec& spec) {
  RewardBreakdown b;
  b.survival = spec.survival;

  const Eigen::Vector2d xy_err = state.position.head<2>() - target.position.head<2>();
  b.xy = spec.w_xy * spec.xy.evaluate(xy_err.squaredNorm());

  const double z_err = state.position.z() - target.position.z();
  b.z = spec.w_z * spec.z.evaluate(z_err * z_err);

  b.velocity = spec.w_velocity * std::exp(-spec.delta_velocity * state.velocity.squaredNorm());

  const double theta = geodesic_angle(error_quaternion(state.attitude, target.attitude));
  b.geodesic = spec.w_geodesic * spec.geodesic.evaluate(theta * theta);

  b.smoothness_penalty = spec.w_smoothness * (action - previous_action).squaredNorm();
  return b;
}

EpisodeStatus check_termination(const QuadrotorState& state, const HoverTarget& target,
                                const TerminationSpec& spec, double elapsed_seconds) {
  EpisodeStatus status;
  auto fail = [&](TerminationReason reason) {
    status.terminated = true;
    status.reason = reason;
    return status;
  };

  if (state.position.z() < spec.min_altitude) return fail(TerminationReason::altitude);
  if ((state.position - target.position).norm() > spec.max_position_error) {
    return fail(TerminationReason::position_error);
  }
  if (spec.max_geodesic_angle) {
    const double theta = geodesic_angle(error_quaternion(state.attitude, target.attitude));
    if (theta > *spec.max_geodesic_angle) return fail(TerminationReason::geodesic_angle);
  } else {
    const Eigen::Vector3d rpy = euler_from_quaternion(state.attitude);
    if (std::abs(rpy.x()) > *spec.max_roll) return fail(TerminationReason::roll);
    if (std::abs(rpy.y()) > *spec.max_pitch) return fail(TerminationReason::pitch);
  }
  if (state.velocity.norm() > spec.max_velocity) return fail(TerminationReason::velocity);
  if (state.body_rates.norm() > spec.max_body_rate) return fail(TerminationReason::body_rate);

  if (elapsed_seconds >= spec.episode_horizon - kHorizonSlack) {
    status.truncated = true;
  }
  return status;
}

Observation make_observation(const QuadrotorState& state, const HoverTarget& target,
                             const Eigen::Vector4d& previous_action,
                             const ObservationSpec& spec, RngStream& rng) {
  Observation obs;
  const Eigen::Vector3d e_p = state.position - target.position;
  for (int i = 0; i < 3; ++i) obs[i] = e_p[i] + spec.sigma_position * rng.gaussian();

  const Quat q_e = error_quaternion(state.attitude, target.attitude);
  const Eigen::Vector4d qe = q_e.coeffs();
  for (int i = 0; i < 4; ++i) obs[3 + i] = qe[i] + spec.sigma_quaternion * rng.gaussian();

  for (int i = 0; i < 3; ++i) {
    obs[7 + i] = state.velocity[i] + spec.sigma_velocity * rng.gaussian();
  }
  for (int i = 0; i < 3; ++i) {
    obs[10 + i] = state.body_rates[i] + spec.sigma_body_rates * rng.gaussian();
  }
  obs.tail<4>() = previous_action;
  return obs;
}

QuadrotorState sample_initial_state(const InitSpec& init, RngStream& rng) {
  QuadrotorState state;
  state.position.x() = rng.uniform(-init.xy_half_range, init.xy_half_range);
  state.position.y() = rng.uniform(-init.xy_half_range, init.xy_half_range);
  state.position.z() = rng.uniform(init.z_min, init.z_max);
  const double roll = rng.uniform(-init.max_roll_pitch, init.max_roll_pitch);
  const double pitch = rng.uniform(-init.max_roll_pitch, init.max_roll_pitch);
  const double yaw = rng.uniform(-M_PI, M_PI);
  state.attitude = quat_from_euler(roll, pitch, yaw);
  state.velocity.setZero();
  state.body_rates.setZero();
  return state;
}

QuadrotorEnv::QuadrotorEnv(const QuadrotorParams& params, const RewardSpec& reward,
                           const TerminationSpec& termination,
                           const ObservationSpec& observation, const InitSpec& init,
                           const HoverTarget& target, const EnvOptions& options,
                           std::uint64_t seed)
    : params_(params),
      reward_(reward),
      termination_(termination),
      observation_(observation),
      init_(init),
      target_(target),
      options_(options),
      rng_(seed) {
  params_.validate();
  reward_.validate();
  termination_.validate();
  observation_.validate();
  init_.validate();
  options_.validate();
}

Observation QuadrotorEnv::reset() {
  return reset_to(sample_initial_state(init_, rng_));
}

Observation QuadrotorEnv::reset_to(const QuadrotorState& state) {
  state_ = state;
  previous_action_.setZero();
  step_count_ = 0;
  done_ = false;
  needs_reset_ = false;
  return make_observation(state_, target_, previous_action_, observation_, rng_);
}

StepOutcome QuadrotorEnv::step(const Eigen::Vector4d& action) {
  if (needs_reset_) throw std::logic_error("env: step before reset");
  if (done_) throw std::logic_error("env: step after episode end");

  Eigen::Vector4d a = action.cwiseMax(-1.0).cwiseMin(1.0);
  const MotorCommand cmd = action_to_rpm(a, params_);
  const double sub_dt = options_.control_dt / options_.physics_substeps;
  for (int i = 0; i < options_.physics_substeps; ++i) {
    state_ = quadrl::step(state_, cmd, params_, sub_dt);
  }
  ++step_count_;

  StepOutcome out;
  out.breakdown = compute_reward(state_, target_, a, previous_action_, reward_);
  out.reward = out.breakdown.total();

  const EpisodeStatus status = check_termination(state_, target_, termination_, elapsed());
  out.terminated = status.terminated;
  out.truncated = status.truncated;
  out.reason = status.reason;
  done_ = status.done();

  out.observation = make_observation(state_, target_, a, observation_, rng_);
  previous_action_ = a;

  if (logger_) {
    StepRecord record;
    record.t = elapsed();
    record.state = state_;
    record.action = a;
    record.reward = out.breakdown;
    record.terminated = out.terminated;
    record.truncated = out.truncated;
    logger_(record);
  }
  return out;
}

}  // namespace quadrl
