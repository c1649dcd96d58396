#include "quadrl/train.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "quadrl/checkpoint.hpp"
#include "quadrl/errors.hpp"

namespace quadrl {

namespace {

// Stream purposes, kept distinct so adding one consumer never shifts another
// consumer's sequence.
constexpr std::uint64_t kPolicyInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kEnvStreamBase = 100;
constexpr std::uint64_t kSamplerStreamBase = 200;

std::string checkpoint_meta(const TrainOptions& options, std::int64_t timesteps, int iteration) {
  nlohmann::json meta;
  meta["experiment"] = nlohmann::json::parse(options.meta_json, nullptr, false);
  if (meta["experiment"].is_discarded()) meta["experiment"] = options.meta_json;
  meta["seed"] = options.seed;
  meta["timesteps"] = timesteps;
  meta["iteration"] = iteration;
  return meta.dump();
}

void write_checkpoint(const std::filesystem::path& path, const PolicyParameters& policy,
                      const AdamOptimizer& adam, const TrainOptions& options,
                      std::int64_t timesteps, int iteration) {
  Checkpoint ckpt;
  ckpt.policy = policy;
  ckpt.meta_json = checkpoint_meta(options, timesteps, iteration);
  ckpt.has_optimizer = true;
  ckpt.adam_step = adam.step_count();
  ckpt.adam_m = adam.first_moment();
  ckpt.adam_v = adam.second_moment();
  save_checkpoint(path, ckpt);
}

}  // namespace

std::string learning_curve_header() {
  return "iteration,timesteps,episode_reward_mean,episode_length_mean,episodes_completed,"
         "policy_loss,value_loss,entropy,clip_fraction,approx_kl,grad_norm,wall_seconds";
}

std::string learning_curve_row(const IterationRecord& rec) {
  std::ostringstream out;
  out.precision(17);
  out << rec.iteration << ',' << rec.timesteps << ',' << rec.episode_reward_mean << ','
      << rec.episode_length_mean << ',' << rec.episodes_completed << ',' << rec.policy_loss << ','
      << rec.value_loss << ',' << rec.entropy << ',' << rec.clip_fraction << ','
      << rec.approx_kl << ',' << rec.grad_norm << ',' << rec.wall_seconds;
  return out.str();
}

std::vector<IterationRecord> read_learning_curve(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open learning curve: " + csv_path.string());
  std::vector<IterationRecord> records;
  std::string line;
  if (!std::getline(in, line)) return records;
  if (line != learning_curve_header()) {
    throw ConfigError("unexpected learning curve header in " + csv_path.string());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    IterationRecord rec;
    char comma;
    row >> rec.iteration >> comma >> rec.timesteps >> comma >> rec.episode_reward_mean >>
        comma >> rec.episode_length_mean >> comma >> rec.episodes_completed >> comma >>
        rec.policy_loss >> comma >> rec.value_loss >> comma >> rec.entropy >> comma >>
        rec.clip_fraction >> comma >> rec.approx_kl >> comma >> rec.grad_norm >> comma >>
        rec.wall_seconds;
    if (row.fail()) throw ConfigError("malformed learning curve row in " + csv_path.string());
    records.push_back(rec);
  }
  return records;
}

TrainResult train(const EnvBundle& bundle, const PpoConfig& config, const TrainOptions& options) {
  config.validate();

  const bool writing = !options.output_dir.empty();
  if (writing) std::filesystem::create_directories(options.output_dir);

  PolicyParameters policy = PolicyParameters::initialize(mix_seed(options.seed, kPolicyInitStream));
  AdamOptimizer adam(policy);
  std::int64_t start_timesteps = 0;
  int start_iteration = 0;
  if (!options.resume_from.empty()) {
    const Checkpoint ckpt = load_checkpoint(options.resume_from);
    policy = ckpt.policy;
    if (ckpt.has_optimizer) adam.restore(ckpt.adam_step, ckpt.adam_m, ckpt.adam_v);
    const auto meta = nlohmann::json::parse(ckpt.meta_json, nullptr, false);
    if (!meta.is_discarded() && meta.is_object()) {
      if (meta.contains("timesteps") && meta["timesteps"].is_number_integer()) {
        start_timesteps = meta["timesteps"].get<std::int64_t>();
      }
      if (meta.contains("iteration") && meta["iteration"].is_number_integer()) {
        start_iteration = meta["iteration"].get<int>();
      }
    }
  }
  RngStream shuffle_rng(mix_seed(options.seed, kShuffleStream));

  std::vector<EnvSlot> slots;
  slots.reserve(static_cast<std::size_t>(config.n_envs));
  for (int e = 0; e < config.n_envs; ++e) {
    slots.push_back(EnvSlot{
        bundle.make_env(mix_seed(options.seed, kEnvStreamBase + static_cast<std::uint64_t>(e))),
        RngStream(mix_seed(options.seed, kSamplerStreamBase + static_cast<std::uint64_t>(e)))});
  }
  for (auto& slot : slots) slot.obs = slot.env.reset();

  RolloutBuffer buffer = RolloutBuffer::allocate(config.n_envs, config.rollout_steps);

  const std::int64_t per_iter = config.steps_per_iteration();
  const std::int64_t remaining = config.total_timesteps - start_timesteps;
  const int iterations =
      start_iteration +
      static_cast<int>(remaining > 0 ? (remaining + per_iter - 1) / per_iter : 0);

  std::ofstream curve;
  if (writing) {
    const std::filesystem::path curve_path = options.output_dir / "learning_curve.csv";
    const bool append = !options.resume_from.empty() && std::filesystem::exists(curve_path);
    curve.open(curve_path, append ? std::ios::app : std::ios::trunc);
    if (!curve) throw std::runtime_error("cannot open learning_curve.csv for writing");
    if (!append) {
      curve << learning_curve_header() << '\n';
      curve.flush();
    }
  }

  TrainResult result;
  std::int64_t timesteps = start_timesteps;
  double last_reward_mean = 0.0;
  double last_length_mean = 0.0;

  for (int iter = start_iteration + 1; iter <= iterations; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();

    PolicyParameters last_good = policy;
    RolloutStats rollout;
    try {
      rollout = collect_rollout(policy, slots, buffer);
    } catch (const DivergenceError& err) {
      if (writing) {
        write_checkpoint(options.output_dir / "diverged_last_good.ckpt", last_good, adam, options,
                         timesteps, iter - 1);
        std::ofstream marker(options.output_dir / "DIVERGED.txt", std::ios::trunc);
        marker << "training diverged during iteration " << iter << ": " << err.what() << '\n';
      }
      throw;
    }
    timesteps += per_iter;

    const UpdateStats update = ppo_update(policy, adam, buffer, config, shuffle_rng);

    IterationRecord rec;
    rec.iteration = iter;
    rec.timesteps = timesteps;
    rec.episodes_completed = static_cast<int>(rollout.episodes.size());
    if (!rollout.episodes.empty()) {
      double reward_sum = 0.0, length_sum = 0.0;
      for (const auto& ep : rollout.episodes) {
        reward_sum += ep.total_reward;
        length_sum += ep.length;
      }
      last_reward_mean = reward_sum / static_cast<double>(rollout.episodes.size());
      last_length_mean = length_sum / static_cast<double>(rollout.episodes.size());
    }
    rec.episode_reward_mean = last_reward_mean;
    rec.episode_length_mean = last_length_mean;
    rec.policy_loss = update.policy_loss;
    rec.value_loss = update.value_loss;
    rec.entropy = update.entropy;
    rec.clip_fraction = update.clip_fraction;
    rec.approx_kl = update.approx_kl;
    rec.grad_norm = update.grad_norm;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(rec);

    if (writing) {
      curve << learning_curve_row(rec) << '\n';
      curve.flush();
      if (options.checkpoint_every > 0 && iter % options.checkpoint_every == 0 &&
          iter != iterations) {
        char name[64];
        std::snprintf(name, sizeof(name), "checkpoint_%06d.ckpt", iter);
        write_checkpoint(options.output_dir / name, policy, adam, options, timesteps, iter);
      }
    }
    if (options.verbose) {
      std::cerr << "iter " << iter << '/' << iterations << "  steps " << timesteps
                << "  ep_reward " << rec.episode_reward_mean << "  ep_len "
                << rec.episode_length_mean << "  kl " << rec.approx_kl << "  ("
                << rec.wall_seconds << " s)\n";
    }
  }

  if (writing) {
    write_checkpoint(options.output_dir / "checkpoint_final.ckpt", policy, adam, options,
                     timesteps, iterations);
  }

  result.policy = std::move(policy);
  result.timesteps = timesteps;
  return result;
}

}  // namespace quadrl
