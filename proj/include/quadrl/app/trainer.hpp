#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "quadrl/app/config.hpp"
#include "quadrl/eval/trajectory.hpp"

namespace quadrl::app {

/// Training log header; one row per finished episode.
inline constexpr const char* kTrainLogHeader =
    "step,episode,episode_length,status,episodic_reward,mean_reward_100,mean_length_100,"
    "critic1_loss,critic2_loss,actor_loss,alpha_loss,alpha";

struct TrainOptions {
  std::filesystem::path run_dir;
  std::ostream* progress = nullptr;
  int progress_every = 25;  // episodes
};

struct TrainSummary {
  std::int64_t steps = 0;
  int episodes = 0;
  double first_mean_reward = 0.0;   // over the first (up to) 100 episodes
  double final_mean_reward = 0.0;   // over the last (up to) 100 episodes
  double mean_episode_length = 0.0;
  std::filesystem::path final_checkpoint;
};

/// Run directory layout: config.ini, train_log.csv, checkpoints/step_<n>.ckpt, final.ckpt.
/// Throws Error on divergence (non-finite losses).
TrainSummary train(const RunConfig& cfg, const TrainOptions& options);

/// Creates `dir` for a new run. Refuses to reuse an existing directory unless `force`.
void prepare_run_dir(const std::filesystem::path& dir, bool force);

/// Deterministic policy loaded from a checkpoint of either precision, together
/// with the configuration it was trained under.
struct LoadedPolicy {
  eval::Policy policy;
  RunConfig config;
  control::ActionSpace action_space;
  std::string scalar;
};

LoadedPolicy load_policy(const std::filesystem::path& checkpoint);

}  // namespace quadrl::app
