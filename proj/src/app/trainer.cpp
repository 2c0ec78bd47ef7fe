#include "quadrl/app/trainer.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numeric>
#include <ostream>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "quadrl/common/csv.hpp"
#include "quadrl/common/errors.hpp"
#include "quadrl/nn/serialize.hpp"
#include "quadrl/rl/checkpoint.hpp"

namespace quadrl::app {

namespace fs = std::filesystem;

namespace {

double mean(const std::deque<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct LossAccumulator {
  rl::LossReport sum;
  int count = 0;

  void add(const rl::LossReport& r) {
    sum.critic1 += r.critic1;
    sum.critic2 += r.critic2;
    sum.actor += r.actor;
    sum.alpha_loss += r.alpha_loss;
    sum.alpha = r.alpha;
    ++count;
  }
  std::string field(double total) const {
    return count ? csv::format(total / count) : std::string{};
  }
};

std::string checkpoint_name(std::int64_t step) {
  std::ostringstream os;
  os << "step_" << std::setw(9) << std::setfill('0') << step << ".ckpt";
  return os.str();
}

template <typename T>
TrainSummary train_impl(const RunConfig& cfg, const TrainOptions& opt) {
  const int action_dim = control::action_dim(cfg.action_space);
  env::QuadEnv env(cfg.env, cfg.action_space, cfg.task, cfg.seed);
  rl::SacAgent<T> agent(action_dim, cfg.sac, cfg.seed);
  rl::ReplayBuffer<T> buffer(cfg.sac.buffer_capacity, env::kObservationSize, action_dim);
  RandomSource rng = RandomSource::derive(cfg.seed, 0x61676e74);

  const std::string config_text = to_ini(cfg);
  {
    std::ofstream(opt.run_dir / "config.ini") << config_text;
  }
  fs::create_directories(opt.run_dir / "checkpoints");
  std::ofstream log(opt.run_dir / "train_log.csv");
  if (!log) throw Error("cannot write training log in " + opt.run_dir.string());
  log << kTrainLogHeader << '\n';

  TrainSummary summary;
  std::deque<double> recent_rewards, recent_lengths;
  double first_sum = 0.0, length_sum = 0.0;
  int first_count = 0;

  auto metadata = [&](std::int64_t step) {
    return nlohmann::json{{"config", config_text},
                          {"step", step},
                          {"episodes", summary.episodes},
                          {"action_space", control::to_string(cfg.action_space)},
                          {"task", env::to_string(cfg.task)},
                          {"agent_rng", rng.save()},
                          {"env_rng", env.rng().save()}};
  };

  env::Observation obs = env.reset();
  double episode_reward = 0.0;
  int episode_length = 0;
  LossAccumulator losses;

  for (std::int64_t step = 1; step <= cfg.total_steps; ++step) {
    Eigen::VectorXd action(action_dim);
    if (static_cast<std::size_t>(step) <= cfg.sac.learning_starts) {
      for (int i = 0; i < action_dim; ++i) action[i] = rng.uniform(-1.0, 1.0);
    } else {
      action = rl::sample_action(agent, obs, rng).action;
    }
    const env::StepResult res = env.step(control::make_action(cfg.action_space, action.data()));
    buffer.push({obs, action, res.reward, res.observation, env::is_failure(res.status)});
    obs = res.observation;
    episode_reward += res.reward;
    ++episode_length;

    if (static_cast<std::size_t>(step) >= cfg.sac.learning_starts) {
      for (int u = 0; u < cfg.sac.updates_per_step; ++u) {
        const rl::LossReport r = rl::update_step(agent, buffer, rng);
        if (!std::isfinite(r.critic1) || !std::isfinite(r.critic2) || !std::isfinite(r.actor) ||
            !std::isfinite(r.alpha))
          throw Error("training diverged at step " + std::to_string(step) +
                      " (non-finite loss)");
        losses.add(r);
      }
    }

    if (res.status != env::EpisodeStatus::Running) {
      ++summary.episodes;
      recent_rewards.push_back(episode_reward);
      recent_lengths.push_back(episode_length);
      if (recent_rewards.size() > 100) {
        recent_rewards.pop_front();
        recent_lengths.pop_front();
      }
      if (first_count < 100) {
        first_sum += episode_reward;
        ++first_count;
      }
      length_sum += episode_length;
      log << step << ',' << summary.episodes << ',' << episode_length << ','
          << env::to_string(res.status) << ',' << csv::format(episode_reward) << ','
          << csv::format(mean(recent_rewards)) << ',' << csv::format(mean(recent_lengths)) << ','
          << losses.field(losses.sum.critic1) << ',' << losses.field(losses.sum.critic2) << ','
          << losses.field(losses.sum.actor) << ',' << losses.field(losses.sum.alpha_loss) << ','
          << csv::format(agent.alpha()) << '\n';
      log.flush();
      if (opt.progress && summary.episodes % opt.progress_every == 0)
        *opt.progress << "step " << step << "  episode " << summary.episodes << "  mean_reward_100 "
                      << mean(recent_rewards) << "  mean_length_100 " << mean(recent_lengths)
                      << "  alpha " << agent.alpha() << std::endl;
      obs = env.reset();
      episode_reward = 0.0;
      episode_length = 0;
      losses = {};
    }

    if (step % cfg.checkpoint_interval == 0 && step != cfg.total_steps)
      rl::save_agent(opt.run_dir / "checkpoints" / checkpoint_name(step), agent, metadata(step));
  }

  summary.steps = cfg.total_steps;
  summary.first_mean_reward = first_count ? first_sum / first_count : 0.0;
  summary.final_mean_reward = mean(recent_rewards);
  summary.mean_episode_length = summary.episodes ? length_sum / summary.episodes : 0.0;
  summary.final_checkpoint = opt.run_dir / "final.ckpt";
  rl::save_agent(summary.final_checkpoint, agent, metadata(cfg.total_steps));
  return summary;
}

template <typename T>
LoadedPolicy make_policy(const fs::path& checkpoint) {
  nlohmann::json meta;
  auto agent = std::make_shared<rl::SacAgent<T>>(rl::load_agent<T>(checkpoint, &meta));
  LoadedPolicy out;
  if (meta.contains("config"))
    apply_ini_text(out.config, meta.at("config").get<std::string>(), checkpoint.string());
  out.action_space = out.config.action_space;
  if (control::action_dim(out.action_space) != agent->action_dim)
    throw SchemaError("checkpoint action dimension does not match its action space");
  out.scalar = std::string(nn::scalar_name<T>());
  out.policy = [agent](const env::Observation& o) { return rl::deterministic_action(*agent, o); };
  return out;
}

}  // namespace

void prepare_run_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!force)
      throw ConfigError("run directory " + dir.string() + " already exists (use --force)");
  }
  fs::create_directories(dir);
}

// Batched updates allocate and free the same large temporaries every step. With
// glibc's defaults the heap top is trimmed and regrown each time, and the page
// faults cost close to half the run time. Affects speed only.
static void keep_heap_resident() {
#ifdef __GLIBC__
  static const bool done = [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 256 << 20);
    return true;
  }();
  (void)done;
#endif
}

TrainSummary train(const RunConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  keep_heap_resident();
  fs::create_directories(options.run_dir);
  return cfg.precision == Precision::F32 ? train_impl<float>(cfg, options)
                                         : train_impl<double>(cfg, options);
}

LoadedPolicy load_policy(const fs::path& checkpoint) {
  const auto header = rl::peek_checkpoint(checkpoint);
  const std::string scalar = header.value("scalar", std::string{});
  if (scalar == "f32") return make_policy<float>(checkpoint);
  if (scalar == "f64") return make_policy<double>(checkpoint);
  throw SchemaError("checkpoint " + checkpoint.string() + " has unknown scalar type '" + scalar + "'");
}

}  // namespace quadrl::app
