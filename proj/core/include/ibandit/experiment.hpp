#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "ibandit/config.hpp"
#include "ibandit/metrics.hpp"
#include "ibandit/simcore.hpp"

namespace ib {

struct BuiltEnvironment {
  std::optional<NetworkData> network;  // empty for unit arms
  std::shared_ptr<const Environment> env;
};

/// Builds the environment of `config` from the env stream of replication 0,
/// so every replication and every policy of a sweep sees the same network,
/// ground truth and held-out set.
BuiltEnvironment build_environment(const RunConfig& config);

std::unique_ptr<Policy> make_policy(const RunConfig& config, const BuiltEnvironment& built, int replication);

struct EpisodeResult {
  std::size_t config_index = 0;
  int replication = 0;
  RunLog log;
  double wall_ms = 0.0;
};

/// Runs every (config, replication) pair on up to `parallel` threads.
/// Results come back ordered by config, then replication.
std::vector<EpisodeResult> run_experiments(const std::vector<RunConfig>& configs, int parallel);

inline const std::vector<std::string> kRunsHeader = {
    "config_hash", "policy", "hyperparameters", "beta", "C_or_objective", "k", "T",
    "rep", "seed", "final_regret", "final_rmse", "explore_rounds", "wall_ms"};
inline const std::vector<std::string> kSeriesHeader = {"config_hash", "rep", "t", "cum_regret",
                                                       "rmse", "phase", "u_t", "C_t"};
inline const std::vector<std::string> kParetoHeader = {
    "config_hash", "policy", "hyperparameters", "beta", "C_or_objective", "k", "T", "replications",
    "regret_mean", "regret_std", "rmse_mean", "rmse_std", "dominated"};

void write_runs_csv(const std::vector<RunConfig>& configs, const std::vector<EpisodeResult>& results,
                    const std::filesystem::path& path);

/// One row per round; the rmse column is filled on snapshot rounds only.
void write_series_csv(const std::vector<RunConfig>& configs, const std::vector<EpisodeResult>& results,
                      const std::filesystem::path& path);

void write_pareto_csv(const std::vector<RunConfig>& configs, const std::vector<EpisodeResult>& results,
                      const std::filesystem::path& path);

// --- report ------------------------------------------------------------------

struct ReportOptions {
  bool log_log = false;
};

/// Reads runs.csv and series.csv from each input directory, checks that
/// all inputs share the expected schemas and that every series row belongs
/// to a listed run, then writes pareto.svg and curves.svg into `out_dir`.
void write_report(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir,
                  const ReportOptions& options = {});

}  // namespace ib
