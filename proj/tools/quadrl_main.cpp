#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "quadrl/checkpoint.hpp"
#include "quadrl/config.hpp"
#include "quadrl/errors.hpp"
#include "quadrl/eval.hpp"
#include "quadrl/svg.hpp"
#include "quadrl/train.hpp"

namespace {

using nlohmann::json;
using namespace quadrl;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitDivergence = 4;

std::filesystem::path output_root() {
  if (const char* root = std::getenv("QUADRL_OUT_ROOT")) return root;
  return "runs";
}

ExperimentConfig resolve_config(const std::string& config_path, const std::string& preset) {
  if (!config_path.empty()) return load_config(config_path);
  return ExperimentConfig::from_preset(preset);
}

ExperimentConfig config_from_checkpoint(const Checkpoint& ckpt) {
  const json meta = json::parse(ckpt.meta_json, nullptr, false);
  if (!meta.is_discarded() && meta.contains("experiment") && meta["experiment"].is_object()) {
    return parse_config(meta["experiment"].dump());
  }
  throw ConfigError("checkpoint carries no embedded experiment config; pass --config");
}

// ---------------------------------------------------------------- trajectory CSV

constexpr const char* kTrajectoryHeader =
    "t,x,y,z,roll,pitch,yaw,vx,vy,vz,wx,wy,wz,a1,a2,a3,a4,reward";

// with_quat_norm appends an extra column holding |q| after renormalization,
// a cheap integration sanity signal for rollout logs.
void write_trajectory_row(std::ostream& out, const StepRecord& r, bool with_quat_norm) {
  const QuadrotorState& s = r.state;
  const Eigen::Vector3d rpy = euler_from_quaternion(s.attitude);
  out << r.t << ',' << s.position.x() << ',' << s.position.y() << ',' << s.position.z() << ','
      << rpy.x() << ',' << rpy.y() << ',' << rpy.z() << ',' << s.velocity.x() << ','
      << s.velocity.y() << ',' << s.velocity.z() << ',' << s.body_rates.x() << ','
      << s.body_rates.y() << ',' << s.body_rates.z() << ',' << r.action[0] << ','
      << r.action[1] << ',' << r.action[2] << ',' << r.action[3] << ',' << r.reward.total();
  if (with_quat_norm) out << ',' << quat_norm(s.attitude);
  out << '\n';
}

// ---------------------------------------------------------------- JSON report

json state_json(const QuadrotorState& s) {
  return {{"position", {s.position.x(), s.position.y(), s.position.z()}},
          {"attitude", {s.attitude.x, s.attitude.y, s.attitude.z, s.attitude.w}},
          {"velocity", {s.velocity.x(), s.velocity.y(), s.velocity.z()}},
          {"body_rates", {s.body_rates.x(), s.body_rates.y(), s.body_rates.z()}}};
}

json channel_json(const ChannelMetrics& m) {
  json j{{"channel", m.channel},
         {"initial", m.initial},
         {"target", m.target},
         {"step_magnitude", m.step_magnitude},
         {"overshoot_percent", m.overshoot},
         {"degenerate_step", m.degenerate_step},
         {"steady_state_abs", m.steady_state_abs}};
  j["settling_time"] = m.settling_time ? json(*m.settling_time) : json(nullptr);
  j["steady_state_percent"] =
      m.steady_state_percent ? json(*m.steady_state_percent) : json(nullptr);
  return j;
}

json report_json(const TrialReport& r) {
  json j{{"trial", r.trial_index},
         {"seed", r.seed},
         {"success", r.success},
         {"duration", r.duration},
         {"total_reward", r.total_reward},
         {"initial_state", state_json(r.initial_state)},
         {"trajectory", r.trajectory_ref}};
  j["failure_reason"] = r.failure_reason ? json(to_string(*r.failure_reason)) : json(nullptr);
  j["channels"] = json::array();
  for (const auto& c : r.channels) j["channels"].push_back(channel_json(c));
  return j;
}

json stats_json(const SummaryStats& s) {
  return {{"n", s.n},     {"mean", s.mean},     {"stddev", s.stddev},
          {"min", s.min}, {"q1", s.q1},         {"median", s.median},
          {"q3", s.q3},   {"max", s.max},       {"outliers", s.outlier_values}};
}

json distribution_json(const MetricDistribution& d) {
  return {{"stats", stats_json(d.stats)}, {"undefined", d.undefined}};
}

json summary_json(const EvalSummary& s) {
  json j{{"trials", s.trials}, {"failures", s.failures}, {"horizon_seconds", s.horizon_seconds}};
  j["channels"] = json::array();
  for (const auto& c : s.channels) {
    j["channels"].push_back({{"channel", c.channel},
                             {"settling_time", distribution_json(c.settling)},
                             {"overshoot", distribution_json(c.overshoot)},
                             {"steady_state", distribution_json(c.steady_state)},
                             {"settling_horizon_mapped", stats_json(c.settling_horizon_mapped)},
                             {"fraction_within_band", c.fraction_within_band},
                             {"fraction_zero_overshoot", c.fraction_zero_overshoot},
                             {"unsettled", c.unsettled}});
  }
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
}

// ------------------------------------------------------------------ boxplots

BoxStats box_from_stats(const std::string& label, const SummaryStats& s) {
  BoxStats b;
  b.label = label;
  b.q1 = s.q1;
  b.median = s.median;
  b.q3 = s.q3;
  // whiskers at the most extreme non-outlier values
  const double iqr = s.q3 - s.q1;
  b.whisker_lo = std::max(s.min, s.q1 - 1.5 * iqr);
  b.whisker_hi = std::min(s.max, s.q3 + 1.5 * iqr);
  b.outliers = s.outlier_values;
  return b;
}

void write_metric_boxplots(const EvalSummary& summary, const std::filesystem::path& dir) {
  BoxChart settling;
  settling.title = "Settling time";
  settling.y_label = "s";
  BoxChart overshoot;
  overshoot.title = "Overshoot";
  overshoot.y_label = "% of step";
  BoxChart sse;
  sse.title = "Steady-state error";
  sse.y_label = "% of step";
  for (const auto& c : summary.channels) {
    if (c.settling.stats.n > 0) settling.boxes.push_back(box_from_stats(c.channel, c.settling.stats));
    if (c.overshoot.stats.n > 0) overshoot.boxes.push_back(box_from_stats(c.channel, c.overshoot.stats));
    if (c.steady_state.stats.n > 0) sse.boxes.push_back(box_from_stats(c.channel, c.steady_state.stats));
  }
  settling.write(dir / "settling_time.svg");
  overshoot.write(dir / "overshoot.svg");
  sse.write(dir / "steady_state_error.svg");
}

std::string summary_csv(const EvalSummary& s) {
  std::ostringstream out;
  out.precision(10);
  out << "channel,metric,n,undefined,mean,stddev,min,q1,median,q3,max,outlier_count\n";
  for (const auto& c : s.channels) {
    const auto row = [&](const char* metric, const MetricDistribution& d) {
      out << c.channel << ',' << metric << ',' << d.stats.n << ',' << d.undefined << ','
          << d.stats.mean << ',' << d.stats.stddev << ',' << d.stats.min << ',' << d.stats.q1
          << ',' << d.stats.median << ',' << d.stats.q3 << ',' << d.stats.max << ','
          << d.stats.outlier_values.size() << '\n';
    };
    row("settling_time_s", c.settling);
    row("overshoot_percent", c.overshoot);
    row("steady_state_percent", c.steady_state);
  }
  return out.str();
}

// ------------------------------------------------------------------ commands

struct TrainArgs {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int n_seeds = 0;
  std::int64_t timesteps = 0;
  int checkpoint_every = 50;
  std::string resume_from;
  bool verbose = false;
};

int run_train(const TrainArgs& args) {
  ExperimentConfig config = resolve_config(args.config_path, args.preset);
  if (args.seed_set) config.seed = args.seed;
  if (args.n_seeds > 0) config.n_seeds = args.n_seeds;
  if (args.timesteps > 0) config.ppo.total_timesteps = args.timesteps;
  config.validate();

  std::filesystem::path out =
      !args.out_dir.empty()
          ? std::filesystem::path(args.out_dir)
          : (!config.output_dir.empty() ? std::filesystem::path(config.output_dir)
                                        : output_root() / config.preset);
  std::filesystem::create_directories(out);
  save_config(out / "config.json", config);

  std::vector<std::vector<IterationRecord>> histories;
  for (int k = 0; k < config.n_seeds; ++k) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(k);
    TrainOptions options;
    options.output_dir = out / ("seed_" + std::to_string(seed));
    options.seed = seed;
    options.checkpoint_every = args.checkpoint_every;
    options.meta_json = serialize_config(config);
    options.verbose = args.verbose;
    std::cout << "training seed " << seed << " -> " << options.output_dir.string() << std::endl;
    TrainResult result = train(config.env, config.ppo, options);
    std::cout << "  " << result.timesteps << " steps, final episode reward "
              << (result.history.empty() ? 0.0 : result.history.back().episode_reward_mean)
              << std::endl;
    histories.push_back(std::move(result.history));
  }

  // Mean learning curve with a min..max band across seeds.
  LineChart chart;
  chart.title = "Rollout episode mean reward";
  chart.x_label = "environment steps";
  chart.y_label = "episode reward";
  if (!histories.empty()) {
    const std::size_t n = histories.front().size();
    Band band;
    Series mean_series;
    mean_series.label = config.n_seeds > 1 ? "mean of " + std::to_string(config.n_seeds) + " seeds"
                                           : "seed " + std::to_string(config.seed);
    for (std::size_t i = 0; i < n; ++i) {
      double lo = histories[0][i].episode_reward_mean, hi = lo, sum = 0.0;
      for (const auto& h : histories) {
        const double v = h[i].episode_reward_mean;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
      }
      const double x = static_cast<double>(histories[0][i].timesteps);
      mean_series.x.push_back(x);
      mean_series.y.push_back(sum / static_cast<double>(histories.size()));
      band.x.push_back(x);
      band.lo.push_back(lo);
      band.hi.push_back(hi);
    }
    if (histories.size() > 1) chart.bands.push_back(std::move(band));
    chart.series.push_back(std::move(mean_series));
  }
  chart.write(out / "learning_curve.svg");
  std::cout << "outputs in " << out.string() << std::endl;
  return kExitOk;
}

struct EvaluateArgs {
  std::string checkpoint_path;
  std::string config_path;
  std::string out_dir;
  int trials = 100;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  double band = 0.02;
  bool no_trajectories = false;
};

int run_evaluate(const EvaluateArgs& args) {
  const Checkpoint ckpt = load_checkpoint(args.checkpoint_path);
  ExperimentConfig config = args.config_path.empty() ? config_from_checkpoint(ckpt)
                                                     : load_config(args.config_path);

  std::filesystem::path out =
      !args.out_dir.empty()
          ? std::filesystem::path(args.out_dir)
          : output_root() / "eval" / std::filesystem::path(args.checkpoint_path).stem();
  std::filesystem::create_directories(out);

  std::vector<TrialTrace> traces;
  std::vector<TrialReport> reports =
      run_trials(ckpt.policy, config.env, args.trials, args.seed, args.horizon, &traces);

  const double horizon =
      args.horizon > 0.0 ? args.horizon : config.env.termination.episode_horizon;

  if (!args.no_trajectories) {
    std::filesystem::create_directories(out / "trajectories");
    for (std::size_t i = 0; i < traces.size(); ++i) {
      char name[48];
      std::snprintf(name, sizeof(name), "trial_%04zu.csv", i);
      const std::filesystem::path path = out / "trajectories" / name;
      std::ofstream csv(path, std::ios::trunc);
      csv.precision(12);
      csv << kTrajectoryHeader << '\n';
      for (const StepRecord& r : traces[i].records) write_trajectory_row(csv, r, false);
      reports[i].trajectory_ref = (std::filesystem::path("trajectories") / name).string();
    }
  }

  const EvalSummary summary = summarize(reports, horizon, args.band);

  json trials_doc = json::array();
  for (const auto& r : reports) trials_doc.push_back(report_json(r));
  write_text(out / "trials.json", trials_doc.dump(2) + "\n");
  write_text(out / "summary.json", summary_json(summary).dump(2) + "\n");
  write_text(out / "summary.csv", summary_csv(summary));
  write_metric_boxplots(summary, out);

  std::cout << summary.trials << " trials, " << summary.failures << " failures\n";
  for (const auto& c : summary.channels) {
    std::cout << "  " << c.channel << ": median settling "
              << (c.settling.stats.n > 0 ? std::to_string(c.settling.stats.median) : "n/a")
              << " s, zero-overshoot fraction " << c.fraction_zero_overshoot
              << ", median sse% "
              << (c.steady_state.stats.n > 0 ? std::to_string(c.steady_state.stats.median)
                                             : "n/a")
              << "\n";
  }
  std::cout << "outputs in " << out.string() << std::endl;
  return kExitOk;
}

struct CompareArgs {
  std::vector<std::string> checkpoints;
  std::string out_dir;
  int tests = 5;
  double horizon = 0.0;
  std::uint64_t seed = 0;
};

int run_compare(const CompareArgs& args) {
  std::filesystem::path out = !args.out_dir.empty() ? std::filesystem::path(args.out_dir)
                                                    : output_root() / "compare";
  std::filesystem::create_directories(out);

  struct Entry {
    std::string label;
    ExperimentConfig config;
    PolicyParameters policy;
    std::vector<TrialReport> reports;
    std::vector<TrialTrace> traces;
  };
  std::vector<Entry> entries;
  for (const auto& path : args.checkpoints) {
    Entry e;
    const Checkpoint ckpt = load_checkpoint(path);
    e.config = config_from_checkpoint(ckpt);
    e.policy = ckpt.policy;
    e.label = e.config.preset == "custom" ? std::filesystem::path(path).stem().string()
                                          : e.config.preset;
    entries.push_back(std::move(e));
  }
  // Disambiguate repeated labels (e.g. the same checkpoint passed twice).
  std::vector<std::string> base_labels;
  for (const auto& e : entries) base_labels.push_back(e.label);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    int seen = 0;
    for (std::size_t j = 0; j < i; ++j) {
      if (base_labels[j] == base_labels[i]) ++seen;
    }
    if (seen > 0) entries[i].label += "_" + std::to_string(seen + 1);
  }

  // Matched conditions: every policy sees the same trial seeds, hence the
  // same initial states and observation noise.
  for (auto& e : entries) {
    e.reports = run_trials(e.policy, e.config.env, args.tests, args.seed, args.horizon, &e.traces);
  }

  // Per-channel overlay of mean responses across tests.
  for (int c = 0; c < 4; ++c) {
    LineChart chart;
    chart.title = std::string("Mean ") + kChannelNames[static_cast<std::size_t>(c)] +
                  " response (" + std::to_string(args.tests) + " tests)";
    chart.x_label = "t (s)";
    chart.y_label = c < 3 ? "m" : "rad";
    for (const auto& e : entries) {
      std::size_t min_len = SIZE_MAX;
      for (const auto& tr : e.traces) {
        min_len = std::min(min_len, tr.channels[static_cast<std::size_t>(c)].size());
      }
      if (min_len == SIZE_MAX || min_len == 0) continue;
      Series s;
      s.label = e.label;
      for (std::size_t k = 0; k < min_len; ++k) {
        double sum = 0.0;
        for (const auto& tr : e.traces) sum += tr.channels[static_cast<std::size_t>(c)][k];
        s.x.push_back(e.traces.front().dt * static_cast<double>(k + 1));
        s.y.push_back(sum / static_cast<double>(e.traces.size()));
      }
      chart.series.push_back(std::move(s));
    }
    chart.write(out / (std::string("response_") + kChannelNames[static_cast<std::size_t>(c)] +
                       ".svg"));
  }

  // Mean motor speeds across tests, one figure per policy.
  for (const auto& e : entries) {
    LineChart chart;
    chart.title = "Mean motor speeds: " + e.label;
    chart.x_label = "t (s)";
    chart.y_label = "RPM";
    std::size_t min_len = SIZE_MAX;
    for (const auto& tr : e.traces) min_len = std::min(min_len, tr.actions.size());
    if (min_len == SIZE_MAX) min_len = 0;
    for (int m = 0; m < 4; ++m) {
      Series s;
      s.label = "motor " + std::to_string(m);
      for (std::size_t k = 0; k < min_len; ++k) {
        double sum = 0.0;
        for (const auto& tr : e.traces) {
          const auto& a = tr.actions[k];
          const MotorCommand cmd = action_to_rpm(
              Eigen::Vector4d(a[0], a[1], a[2], a[3]), e.config.env.params);
          sum += cmd.rpm[static_cast<std::size_t>(m)];
        }
        s.x.push_back(e.traces.front().dt * static_cast<double>(k + 1));
        s.y.push_back(sum / static_cast<double>(e.traces.size()));
      }
      chart.series.push_back(std::move(s));
    }
    chart.write(out / ("motor_rpm_" + e.label + ".svg"));
  }

  // Flat metric table.
  std::ostringstream csv;
  csv.precision(10);
  csv << "policy,test,channel,settling_time_s,overshoot_percent,steady_state_percent,success\n";
  for (const auto& e : entries) {
    for (const auto& r : e.reports) {
      for (const auto& ch : r.channels) {
        csv << e.label << ',' << r.trial_index << ',' << ch.channel << ',';
        if (ch.settling_time) csv << *ch.settling_time;
        csv << ',' << ch.overshoot << ',';
        if (ch.steady_state_percent) csv << *ch.steady_state_percent;
        csv << ',' << (r.success ? 1 : 0) << '\n';
      }
    }
  }
  write_text(out / "comparison.csv", csv.str());
  std::cout << "outputs in " << out.string() << std::endl;
  return kExitOk;
}

struct RolloutArgs {
  std::string checkpoint_path;
  bool hover = false;
  bool random = false;
  std::string preset = "baseline";
  std::string out_path;
  double duration = 10.0;
  std::uint64_t seed = 0;
};

int run_rollout(const RolloutArgs& args) {
  ExperimentConfig config;
  std::optional<PolicyParameters> policy;
  if (!args.checkpoint_path.empty()) {
    const Checkpoint ckpt = load_checkpoint(args.checkpoint_path);
    policy = ckpt.policy;
    config = config_from_checkpoint(ckpt);
  } else {
    config = ExperimentConfig::from_preset(args.preset);
  }
  config.env.termination.episode_horizon = std::max(args.duration, 1e-9);

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!args.out_path.empty()) {
    file.open(args.out_path, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open " + args.out_path + " for writing");
    out = &file;
  }
  out->precision(12);
  *out << kTrajectoryHeader << ",quat_norm" << '\n';
  if (args.duration <= 0.0) return kExitOk;

  QuadrotorEnv env = config.env.make_env(mix_seed(args.seed, 0));
  env.set_step_logger([&](const StepRecord& r) { write_trajectory_row(*out, r, true); });

  Observation obs;
  if (args.hover) {
    QuadrotorState start;
    start.position = config.env.target.position;
    start.attitude = config.env.target.attitude;
    obs = env.reset_to(start);
  } else {
    obs = env.reset();
  }

  RngStream action_rng(mix_seed(args.seed, 1));
  std::optional<TerminationReason> failure;
  bool truncated = false;
  while (!env.done()) {
    Eigen::Vector4d action;
    if (args.hover) {
      action.setZero();
    } else if (args.random) {
      for (int i = 0; i < 4; ++i) action[i] = action_rng.uniform(-1.0, 1.0);
    } else {
      action = deterministic_action(*policy, obs);
    }
    const StepOutcome step = env.step(action);
    obs = step.observation;
    if (step.terminated) failure = step.reason;
    truncated = step.truncated;
  }
  if (failure) {
    *out << "# terminated: " << to_string(*failure) << " at t=" << env.elapsed() << " s\n";
  } else if (truncated) {
    *out << "# truncated: reached horizon at t=" << env.elapsed() << " s\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadrotor hover policies: simulate, train, evaluate, compare"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* cmd_train = app.add_subcommand("train", "Train PPO policies");
  auto* topt_config = cmd_train->add_option("--config", train_args.config_path,
                                            "Experiment config file (JSON, // comments allowed)");
  auto* topt_preset =
      cmd_train->add_option("--preset", train_args.preset, "Built-in preset")
          ->check(CLI::IsMember(preset_names()));
  topt_config->excludes(topt_preset);
  cmd_train->add_option("--seed", train_args.seed, "Base seed")
      ->each([&](const std::string&) { train_args.seed_set = true; });
  cmd_train->add_option("--seeds", train_args.n_seeds, "Number of seeds (seed, seed+1, ...)");
  cmd_train->add_option("--timesteps", train_args.timesteps, "Override total environment steps");
  cmd_train->add_option("--checkpoint-every", train_args.checkpoint_every,
                        "Checkpoint cadence in iterations (<=0: final only)");
  cmd_train->add_option("--out", train_args.out_dir, "Output directory");
  cmd_train->add_flag("--verbose", train_args.verbose, "Per-iteration progress on stderr");

  EvaluateArgs eval_args;
  CLI::App* cmd_eval = app.add_subcommand("evaluate", "Step-response evaluation of a checkpoint");
  cmd_eval->add_option("--checkpoint", eval_args.checkpoint_path, "Policy checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_eval->add_option("--config", eval_args.config_path,
                       "Override the checkpoint's embedded experiment config");
  cmd_eval->add_option("--trials", eval_args.trials, "Number of trials")
      ->check(CLI::PositiveNumber);
  cmd_eval->add_option("--horizon", eval_args.horizon, "Trial horizon in seconds (0: preset's)");
  cmd_eval->add_option("--seed", eval_args.seed, "Evaluation seed");
  cmd_eval->add_option("--band", eval_args.band, "Settling band as a fraction of step magnitude");
  cmd_eval->add_option("--out", eval_args.out_dir, "Output directory");
  cmd_eval->add_flag("--no-trajectories", eval_args.no_trajectories,
                     "Skip per-trial trajectory CSVs");

  CompareArgs compare_args;
  CLI::App* cmd_compare = app.add_subcommand("compare", "Matched-seed policy comparison");
  cmd_compare
      ->add_option("--checkpoints", compare_args.checkpoints, "Two or more policy checkpoints")
      ->required()
      ->expected(2, 16);
  cmd_compare->add_option("--tests", compare_args.tests, "Tests per policy")
      ->check(CLI::PositiveNumber);
  cmd_compare->add_option("--horizon", compare_args.horizon, "Test horizon in seconds");
  cmd_compare->add_option("--seed", compare_args.seed, "Shared test seed");
  cmd_compare->add_option("--out", compare_args.out_dir, "Output directory");

  RolloutArgs rollout_args;
  CLI::App* cmd_rollout = app.add_subcommand("rollout", "Log one episode as CSV");
  auto* ropt_ckpt =
      cmd_rollout->add_option("--checkpoint", rollout_args.checkpoint_path, "Policy checkpoint");
  auto* ropt_hover = cmd_rollout->add_flag("--hover", rollout_args.hover,
                                           "Builtin hover controller from the target state");
  auto* ropt_random =
      cmd_rollout->add_flag("--random", rollout_args.random, "Uniform random actions");
  ropt_ckpt->excludes(ropt_hover)->excludes(ropt_random);
  ropt_hover->excludes(ropt_random);
  cmd_rollout->add_option("--preset", rollout_args.preset,
                          "Environment preset for --hover/--random")
      ->check(CLI::IsMember(preset_names()));
  cmd_rollout->add_option("--duration", rollout_args.duration, "Seconds to simulate");
  cmd_rollout->add_option("--seed", rollout_args.seed, "Episode seed");
  cmd_rollout->add_option("--out", rollout_args.out_path, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*cmd_train) {
      if (train_args.config_path.empty() && train_args.preset.empty()) {
        std::cerr << "train: pass --preset or --config\n";
        return kExitConfig;
      }
      return run_train(train_args);
    }
    if (*cmd_eval) return run_evaluate(eval_args);
    if (*cmd_compare) return run_compare(compare_args);
    if (*cmd_rollout) {
      if (rollout_args.checkpoint_path.empty() && !rollout_args.hover && !rollout_args.random) {
        std::cerr << "rollout: pass --checkpoint, --hover, or --random\n";
        return kExitConfig;
      }
      return run_rollout(rollout_args);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
