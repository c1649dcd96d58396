#include "quadrl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "quadrl/errors.hpp"

namespace quadrl {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) {
      throw ConfigError("config: unknown key \"" + (path.empty() ? key : path + "." + key) + "\"");
    }
  }
}

template <typename T>
void assign(const json& obj, const std::string& path, const char* key, T& field) {
  if (!obj.contains(key)) return;
  try {
    field = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config: bad value for \"" + path + "." + key + "\": " + e.what());
  }
}

void assign_optional(const json& obj, const std::string& path, const char* key,
                     std::optional<double>& field) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (v.is_null()) {
    field.reset();
  } else if (v.is_number()) {
    field = v.get<double>();
  } else {
    throw ConfigError("config: \"" + path + "." + key + "\" must be a number or null");
  }
}

void assign_vec3(const json& obj, const std::string& path, const char* key, Eigen::Vector3d& field) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 3 || !v[0].is_number()) {
    throw ConfigError("config: \"" + path + "." + key + "\" must be an array of 3 numbers");
  }
  for (int i = 0; i < 3; ++i) field[i] = v[static_cast<std::size_t>(i)].get<double>();
}

json vec3_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

void parse_bandwidth(const json& obj, const std::string& path, RewardBandwidth& b) {
  check_keys(obj, path, {"alpha", "beta", "delta_alpha", "delta_beta"});
  assign(obj, path, "alpha", b.alpha);
  assign(obj, path, "beta", b.beta);
  assign(obj, path, "delta_alpha", b.delta_alpha);
  assign(obj, path, "delta_beta", b.delta_beta);
}

json bandwidth_json(const RewardBandwidth& b) {
  return {{"alpha", b.alpha}, {"beta", b.beta}, {"delta_alpha", b.delta_alpha},
          {"delta_beta", b.delta_beta}};
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"acrobatic", "baseline", "inspection"};
  return names;
}

ExperimentConfig ExperimentConfig::from_preset(const std::string& name) {
  ExperimentConfig config;
  config.preset = name;
  if (name == "baseline") {
    config.env.reward = RewardSpec::baseline();
    config.env.termination = TerminationSpec::baseline();
  } else if (name == "acrobatic") {
    config.env.reward = RewardSpec::acrobatic();
    config.env.termination = TerminationSpec::acrobatic();
  } else if (name == "inspection") {
    config.env.reward = RewardSpec::inspection();
    config.env.termination = TerminationSpec::inspection();
  } else {
    std::string valid;
    for (const auto& p : preset_names()) valid += (valid.empty() ? "" : ", ") + p;
    throw ConfigError("config: unknown preset \"" + name + "\" (valid: " + valid + ")");
  }
  return config;
}

void ExperimentConfig::validate() const {
  env.params.validate();
  env.reward.validate();
  env.termination.validate();
  env.observation.validate();
  env.init.validate();
  env.options.validate();
  ppo.validate();
  if (n_seeds < 1) throw ConfigError("config: n_seeds must be >= 1");
}

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["seed"] = c.seed;
  j["n_seeds"] = c.n_seeds;
  j["output_dir"] = c.output_dir;
  j["quadrotor"] = {{"mass", c.env.params.mass},
                    {"arm_length", c.env.params.arm_length},
                    {"thrust_coefficient", c.env.params.thrust_coefficient},
                    {"moment_coefficient", c.env.params.moment_coefficient},
                    {"propeller_radius", c.env.params.propeller_radius},
                    {"inertia_diag", vec3_json(c.env.params.inertia_diag)},
                    {"drag_diag", vec3_json(c.env.params.drag_diag)},
                    {"gravity", c.env.params.gravity},
                    {"max_rpm", c.env.params.max_rpm}};
  j["reward"] = {{"survival", c.env.reward.survival},
                 {"w_xy", c.env.reward.w_xy},
                 {"w_z", c.env.reward.w_z},
                 {"w_velocity", c.env.reward.w_velocity},
                 {"w_geodesic", c.env.reward.w_geodesic},
                 {"w_smoothness", c.env.reward.w_smoothness},
                 {"xy", bandwidth_json(c.env.reward.xy)},
                 {"z", bandwidth_json(c.env.reward.z)},
                 {"delta_velocity", c.env.reward.delta_velocity},
                 {"geodesic", bandwidth_json(c.env.reward.geodesic)}};
  j["termination"] = {{"min_altitude", c.env.termination.min_altitude},
                      {"max_position_error", c.env.termination.max_position_error},
                      {"max_geodesic_angle", optional_json(c.env.termination.max_geodesic_angle)},
                      {"max_roll", optional_json(c.env.termination.max_roll)},
                      {"max_pitch", optional_json(c.env.termination.max_pitch)},
                      {"max_velocity", c.env.termination.max_velocity},
                      {"max_body_rate", c.env.termination.max_body_rate},
                      {"episode_horizon", c.env.termination.episode_horizon}};
  j["observation"] = {{"sigma_position", c.env.observation.sigma_position},
                      {"sigma_quaternion", c.env.observation.sigma_quaternion},
                      {"sigma_velocity", c.env.observation.sigma_velocity},
                      {"sigma_body_rates", c.env.observation.sigma_body_rates}};
  j["init"] = {{"xy_half_range", c.env.init.xy_half_range},
               {"z_min", c.env.init.z_min},
               {"z_max", c.env.init.z_max},
               {"max_roll_pitch", c.env.init.max_roll_pitch}};
  j["target"] = {{"position", vec3_json(c.env.target.position)},
                 {"attitude", json::array({c.env.target.attitude.x, c.env.target.attitude.y,
                                           c.env.target.attitude.z, c.env.target.attitude.w})}};
  j["env"] = {{"control_dt", c.env.options.control_dt},
              {"physics_substeps", c.env.options.physics_substeps}};
  j["ppo"] = {{"n_envs", c.ppo.n_envs},
              {"rollout_steps", c.ppo.rollout_steps},
              {"minibatch_size", c.ppo.minibatch_size},
              {"epochs", c.ppo.epochs},
              {"learning_rate", c.ppo.learning_rate},
              {"clip_ratio", c.ppo.clip_ratio},
              {"gamma", c.ppo.gamma},
              {"gae_lambda", c.ppo.gae_lambda},
              {"value_coef", c.ppo.value_coef},
              {"entropy_coef", c.ppo.entropy_coef},
              {"max_grad_norm", c.ppo.max_grad_norm},
              {"total_timesteps", c.ppo.total_timesteps}};
  return j.dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse failure: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(j, "", {"preset", "seed", "n_seeds", "output_dir", "quadrotor", "reward",
                     "termination", "observation", "init", "target", "env", "ppo"});

  std::string preset = "baseline";
  assign(j, "", "preset", preset);
  // "custom" starts from the baseline values so partial files stay valid.
  ExperimentConfig c = ExperimentConfig::from_preset(preset == "custom" ? "baseline" : preset);
  c.preset = preset;
  assign(j, "", "seed", c.seed);
  assign(j, "", "n_seeds", c.n_seeds);
  assign(j, "", "output_dir", c.output_dir);

  if (j.contains("quadrotor")) {
    const json& q = j.at("quadrotor");
    check_keys(q, "quadrotor",
               {"mass", "arm_length", "thrust_coefficient", "moment_coefficient",
                "propeller_radius", "inertia_diag", "drag_diag", "gravity", "max_rpm"});
    assign(q, "quadrotor", "mass", c.env.params.mass);
    assign(q, "quadrotor", "arm_length", c.env.params.arm_length);
    assign(q, "quadrotor", "thrust_coefficient", c.env.params.thrust_coefficient);
    assign(q, "quadrotor", "moment_coefficient", c.env.params.moment_coefficient);
    assign(q, "quadrotor", "propeller_radius", c.env.params.propeller_radius);
    assign_vec3(q, "quadrotor", "inertia_diag", c.env.params.inertia_diag);
    assign_vec3(q, "quadrotor", "drag_diag", c.env.params.drag_diag);
    assign(q, "quadrotor", "gravity", c.env.params.gravity);
    assign(q, "quadrotor", "max_rpm", c.env.params.max_rpm);
  }
  if (j.contains("reward")) {
    const json& r = j.at("reward");
    check_keys(r, "reward", {"survival", "w_xy", "w_z", "w_velocity", "w_geodesic",
                             "w_smoothness", "xy", "z", "delta_velocity", "geodesic"});
    assign(r, "reward", "survival", c.env.reward.survival);
    assign(r, "reward", "w_xy", c.env.reward.w_xy);
    assign(r, "reward", "w_z", c.env.reward.w_z);
    assign(r, "reward", "w_velocity", c.env.reward.w_velocity);
    assign(r, "reward", "w_geodesic", c.env.reward.w_geodesic);
    assign(r, "reward", "w_smoothness", c.env.reward.w_smoothness);
    if (r.contains("xy")) parse_bandwidth(r.at("xy"), "reward.xy", c.env.reward.xy);
    if (r.contains("z")) parse_bandwidth(r.at("z"), "reward.z", c.env.reward.z);
    assign(r, "reward", "delta_velocity", c.env.reward.delta_velocity);
    if (r.contains("geodesic")) {
      parse_bandwidth(r.at("geodesic"), "reward.geodesic", c.env.reward.geodesic);
    }
  }
  if (j.contains("termination")) {
    const json& t = j.at("termination");
    check_keys(t, "termination",
               {"min_altitude", "max_position_error", "max_geodesic_angle", "max_roll",
                "max_pitch", "max_velocity", "max_body_rate", "episode_horizon"});
    assign(t, "termination", "min_altitude", c.env.termination.min_altitude);
    assign(t, "termination", "max_position_error", c.env.termination.max_position_error);
    assign_optional(t, "termination", "max_geodesic_angle", c.env.termination.max_geodesic_angle);
    assign_optional(t, "termination", "max_roll", c.env.termination.max_roll);
    assign_optional(t, "termination", "max_pitch", c.env.termination.max_pitch);
    assign(t, "termination", "max_velocity", c.env.termination.max_velocity);
    assign(t, "termination", "max_body_rate", c.env.termination.max_body_rate);
    assign(t, "termination", "episode_horizon", c.env.termination.episode_horizon);
  }
  if (j.contains("observation")) {
    const json& o = j.at("observation");
    check_keys(o, "observation",
               {"sigma_position", "sigma_quaternion", "sigma_velocity", "sigma_body_rates"});
    assign(o, "observation", "sigma_position", c.env.observation.sigma_position);
    assign(o, "observation", "sigma_quaternion", c.env.observation.sigma_quaternion);
    assign(o, "observation", "sigma_velocity", c.env.observation.sigma_velocity);
    assign(o, "observation", "sigma_body_rates", c.env.observation.sigma_body_rates);
  }
  if (j.contains("init")) {
    const json& i = j.at("init");
    check_keys(i, "init", {"xy_half_range", "z_min", "z_max", "max_roll_pitch"});
    assign(i, "init", "xy_half_range", c.env.init.xy_half_range);
    assign(i, "init", "z_min", c.env.init.z_min);
    assign(i, "init", "z_max", c.env.init.z_max);
    assign(i, "init", "max_roll_pitch", c.env.init.max_roll_pitch);
  }
  if (j.contains("target")) {
    const json& t = j.at("target");
    check_keys(t, "target", {"position", "attitude"});
    assign_vec3(t, "target", "position", c.env.target.position);
    if (t.contains("attitude")) {
      const json& a = t.at("attitude");
      if (!a.is_array() || a.size() != 4) {
        throw ConfigError("config: \"target.attitude\" must be an array of 4 numbers (x,y,z,w)");
      }
      c.env.target.attitude = {a[0].get<double>(), a[1].get<double>(), a[2].get<double>(),
                               a[3].get<double>()};
    }
  }
  if (j.contains("env")) {
    const json& e = j.at("env");
    check_keys(e, "env", {"control_dt", "physics_substeps"});
    assign(e, "env", "control_dt", c.env.options.control_dt);
    assign(e, "env", "physics_substeps", c.env.options.physics_substeps);
  }
  if (j.contains("ppo")) {
    const json& p = j.at("ppo");
    check_keys(p, "ppo",
               {"n_envs", "rollout_steps", "minibatch_size", "epochs", "learning_rate",
                "clip_ratio", "gamma", "gae_lambda", "value_coef", "entropy_coef",
                "max_grad_norm", "total_timesteps"});
    assign(p, "ppo", "n_envs", c.ppo.n_envs);
    assign(p, "ppo", "rollout_steps", c.ppo.rollout_steps);
    assign(p, "ppo", "minibatch_size", c.ppo.minibatch_size);
    assign(p, "ppo", "epochs", c.ppo.epochs);
    assign(p, "ppo", "learning_rate", c.ppo.learning_rate);
    assign(p, "ppo", "clip_ratio", c.ppo.clip_ratio);
    assign(p, "ppo", "gamma", c.ppo.gamma);
    assign(p, "ppo", "gae_lambda", c.ppo.gae_lambda);
    assign(p, "ppo", "value_coef", c.ppo.value_coef);
    assign(p, "ppo", "entropy_coef", c.ppo.entropy_coef);
    assign(p, "ppo", "max_grad_norm", c.ppo.max_grad_norm);
    assign(p, "ppo", "total_timesteps", c.ppo.total_timesteps);
  }

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (" + path.string() + ")");
  }
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("config: cannot open " + path.string() + " for writing");
  out << serialize_config(config);
}

}  // namespace quadrl
