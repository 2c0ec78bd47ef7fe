// quadrl: train, evaluate and compare quadrotor SAC controllers.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadrl/app/compare.hpp"
#include "quadrl/app/config.hpp"
#include "quadrl/app/evaluation.hpp"
#include "quadrl/app/trainer.hpp"
#include "quadrl/common/csv.hpp"
#include "quadrl/common/errors.hpp"
#include "quadrl/eval/metrics.hpp"
#include "quadrl/eval/paths.hpp"

namespace fs = std::filesystem;
using namespace quadrl;

namespace {

fs::path output_root() {
  const char* env = std::getenv("QUADRL_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::path("runs");
}

Eigen::Vector3d parse_point(const std::string& text, const char* flag) {
  const auto parts = csv::split(text, ',');
  if (parts.size() != 3) throw ConfigError(std::string(flag) + " expects x,y,z");
  Eigen::Vector3d p;
  for (int i = 0; i < 3; ++i) {
    try {
      std::size_t used = 0;
      p[i] = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
    } catch (const std::exception&) {
      throw ConfigError(std::string(flag) + ": '" + parts[i] + "' is not a number");
    }
  }
  return p;
}

/// Options shared by every command that builds a RunConfig.
struct ConfigFlags {
  std::string profile;
  std::string file;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--profile", profile, "Preset budget: full-stabilize, full-track, desk");
    app->add_option("--config", file, "Sectioned key-value config file");
    app->add_option("--set", overrides, "Override a key, e.g. --set sac.batch_size=128");
  }

  // defaults < profile < file < flags
  app::RunConfig build(app::RunConfig base = {}) const {
    if (!profile.empty()) app::apply_profile(base, profile);
    if (!file.empty()) app::apply_ini_file(base, file);
    app::apply_overrides(base, overrides);
    return base;
  }
};

struct TrainFlags {
  ConfigFlags config;
  std::optional<std::string> task, action_space;
  std::optional<std::int64_t> steps;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  int jobs = 1;
  std::string out;
  bool force = false;
};

int cmd_train(const TrainFlags& f) {
  app::RunConfig cfg = f.config.build();
  if (f.task) app::set_value(cfg, "run.task", *f.task);
  if (f.action_space) app::set_value(cfg, "run.action_space", *f.action_space);
  if (f.steps) {
    if (*f.steps <= 0) throw ConfigError("--steps must be > 0");
    cfg.total_steps = *f.steps;
  }
  if (f.seed) cfg.seed = *f.seed;
  cfg.validate();

  const fs::path base = f.out.empty()
                            ? output_root() / (std::string(env::to_string(cfg.task)) + "_" +
                                               control::to_string(cfg.action_space))
                            : fs::path(f.out);
  std::vector<std::uint64_t> seeds = f.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : f.seeds;

  auto run_one = [&](std::uint64_t seed, bool verbose) {
    app::RunConfig c = cfg;
    c.seed = seed;
    const fs::path dir = f.seeds.empty() ? base : base / ("seed_" + std::to_string(seed));
    app::prepare_run_dir(dir, f.force);
    app::TrainOptions opt{dir, verbose ? &std::cerr : nullptr};
    const auto s = app::train(c, opt);
    std::cout << dir.string() << ": steps " << s.steps << ", episodes " << s.episodes
              << ", final 100-episode mean reward " << s.final_mean_reward << '\n';
    return s;
  };

  if (seeds.size() == 1 || f.jobs <= 1) {
    for (auto s : seeds) run_one(s, seeds.size() == 1);
  } else {
    std::vector<std::future<app::TrainSummary>> running;
    for (auto s : seeds) {
      if (static_cast<int>(running.size()) >= f.jobs) {
        running.front().get();
        running.erase(running.begin());
      }
      running.push_back(std::async(std::launch::async, run_one, s, false));
    }
    for (auto& r : running) r.get();
  }
  return 0;
}

struct EvalFlags {
  std::string checkpoint;
  ConfigFlags config;
  std::optional<int> episodes;
  std::string initial, target, action_space, out;
  bool force = false;
};

/// The checkpoint's own config, then any explicit overrides.
app::LoadedPolicy load_with_overrides(const std::string& checkpoint, const ConfigFlags& flags,
                                      const std::string& expected_space) {
  if (!fs::exists(checkpoint)) throw SchemaError("checkpoint not found: " + checkpoint);
  app::LoadedPolicy loaded = app::load_policy(checkpoint);
  loaded.config = flags.build(loaded.config);
  if (!expected_space.empty() &&
      control::parse_action_space(expected_space) != loaded.action_space)
    throw SchemaError("checkpoint " + checkpoint + " was trained with action space '" +
                      control::to_string(loaded.action_space) + "', not '" + expected_space + "'");
  if (loaded.config.action_space != loaded.action_space)
    throw SchemaError("config action space '" +
                      std::string(control::to_string(loaded.config.action_space)) +
                      "' disagrees with checkpoint action space '" +
                      control::to_string(loaded.action_space) + "'");
  loaded.config.validate();
  return loaded;
}

int cmd_eval(const EvalFlags& f) {
  const auto loaded = load_with_overrides(f.checkpoint, f.config, f.action_space);
  app::EvalOptions opt;
  opt.episodes = f.episodes.value_or(loaded.config.eval_episodes);
  opt.seed = loaded.config.eval_seed;
  if (!f.initial.empty()) opt.initial = parse_point(f.initial, "--initial");
  if (!f.target.empty()) opt.target = parse_point(f.target, "--target");

  const fs::path dir = f.out.empty() ? fs::path(f.checkpoint).parent_path() / "eval" : fs::path(f.out);
  app::prepare_run_dir(dir, f.force);
  const auto report = app::evaluate(loaded.policy, loaded.config, opt);
  for (std::size_t i = 0; i < report.episodes.size(); ++i)
    eval::write_trajectory_csv(dir / ("episode_" + std::to_string(i) + ".csv"),
                               report.episodes[i].log);
  app::write_metrics_csv(dir / "metrics.csv", report);

  const auto& a = report.aggregate;
  std::cout << "episodes " << report.episodes.size() << "  ended within 0.15 m: "
            << report.ended_within(0.15) << "\n"
            << "steady-state error x/y/z [m]: " << a.steady_state_error.transpose() << "\n"
            << "overshoot x/y/z [%]: " << a.overshoot.transpose() << "\n"
            << "settling time [s]: " << a.settling_time << "  rms error [m]: " << a.rms_path_error
            << "\nwrote " << (dir / "metrics.csv").string() << '\n';
  return 0;
}

struct FollowFlags {
  std::string checkpoint;
  ConfigFlags config;
  std::string path, path_file, out;
  bool force = false;
};

int cmd_follow(const FollowFlags& f) {
  if (f.path.empty() == f.path_file.empty())
    throw ConfigError("give exactly one of --path (helix|infinity) or --path-file");
  eval::PathSpec spec;
  app::RunConfig preview = f.config.build();
  if (!f.path_file.empty()) {
    spec = eval::read_waypoints(f.path_file);
  } else if (f.path == "helix") {
    spec = preview.helix;
  } else if (f.path == "infinity" || f.path == "lemniscate") {
    spec = preview.lemniscate;
  } else {
    throw ConfigError("unknown --path '" + f.path + "' (helix or infinity)");
  }
  const auto loaded = load_with_overrides(f.checkpoint, f.config, "");
  if (f.path == "helix") spec = loaded.config.helix;
  if (f.path == "infinity" || f.path == "lemniscate") spec = loaded.config.lemniscate;

  env::QuadEnv env(loaded.config.env, loaded.action_space, loaded.config.task, loaded.config.eval_seed);
  const auto log = eval::follow_path(loaded.policy, spec, env);
  const auto metrics = eval::compute_metrics(log, eval::MetricsMode::PathTracking, loaded.config.metrics);

  const std::string name = f.path.empty() ? fs::path(f.path_file).stem().string() : f.path;
  const fs::path dir =
      f.out.empty() ? fs::path(f.checkpoint).parent_path() / ("follow_" + name) : fs::path(f.out);
  app::prepare_run_dir(dir, f.force);
  eval::write_trajectory_csv(dir / "trajectory.csv", log);
  app::write_path_metrics_csv(dir / "metrics.csv", log, metrics);
  std::cout << "path " << name << ": " << log.samples.size() << " samples, status "
            << env::to_string(log.status) << (metrics.complete ? "" : " (INCOMPLETE)")
            << "\nrms path error [m]: " << metrics.rms_path_error
            << "\nwrote " << (dir / "trajectory.csv").string() << '\n';
  return metrics.complete ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadrotor SAC workbench: thrust-vector and RPM controllers"};
  app.require_subcommand(1);

  TrainFlags train;
  auto* t = app.add_subcommand("train", "Seeded SAC training run(s)");
  train.config.attach(t);
  t->add_option("--task", train.task, "stabilize | track_random");
  t->add_option("--action-space", train.action_space, "thrust_vector | rpm");
  t->add_option("--steps", train.steps, "Environment steps");
  t->add_option("--seed", train.seed, "Master seed");
  t->add_option("--seeds", train.seeds, "Several seeds, one run directory each")->delimiter(',');
  t->add_option("--jobs", train.jobs, "Concurrent runs with --seeds");
  t->add_option("--out", train.out, "Run directory (default $QUADRL_OUTPUT_ROOT/<task>_<space>)");
  t->add_flag("--force", train.force, "Reuse an existing run directory");

  EvalFlags ev;
  auto* e = app.add_subcommand("eval", "Deterministic step-response episodes from a checkpoint");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  ev.config.attach(e);
  e->add_option("--episodes", ev.episodes, "Episode count (default eval.episodes)");
  e->add_option("--initial", ev.initial, "Fixed initial position x,y,z");
  e->add_option("--target", ev.target, "Fixed target x,y,z");
  e->add_option("--action-space", ev.action_space, "Expected action space (checked)");
  e->add_option("--out", ev.out, "Output directory (default <checkpoint dir>/eval)");
  e->add_flag("--force", ev.force, "Reuse an existing output directory");

  FollowFlags fo;
  auto* f = app.add_subcommand("follow", "Follow a reference path with a trained checkpoint");
  f->add_option("--checkpoint", fo.checkpoint, "Checkpoint file")->required();
  fo.config.attach(f);
  f->add_option("--path", fo.path, "helix | infinity (alias lemniscate)");
  f->add_option("--path-file", fo.path_file, "CSV with header t,x,y,z");
  f->add_option("--out", fo.out, "Output directory (default <checkpoint dir>/follow_<path>)");
  f->add_flag("--force", fo.force, "Reuse an existing output directory");

  std::string cmp_a, cmp_b, cmp_out;
  std::optional<double> threshold;
  auto* c = app.add_subcommand("compare", "Side-by-side table of two training logs or metrics files");
  c->add_option("first", cmp_a)->required();
  c->add_option("second", cmp_b)->required();
  c->add_option("--threshold", threshold, "Reward threshold for steps-to-threshold");
  c->add_option("--out", cmp_out, "Write the table here instead of stdout");

  ConfigFlags show;
  auto* s = app.add_subcommand("config", "Print the merged configuration");
  show.attach(s);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*t) return cmd_train(train);
    if (*e) return cmd_eval(ev);
    if (*f) return cmd_follow(fo);
    if (*c) {
      const auto table = app::compare_files(cmp_a, cmp_b, threshold);
      if (cmp_out.empty()) {
        app::write_table_csv(std::cout, table);
      } else {
        std::ofstream os(cmp_out);
        app::write_table_csv(os, table);
      }
      return 0;
    }
    if (*s) {
      const auto cfg = show.build();
      cfg.validate();
      std::cout << app::to_ini(cfg);
      return 0;
    }
  } catch (const quadrl::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
