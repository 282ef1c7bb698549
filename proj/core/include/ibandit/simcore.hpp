#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ibandit/common.hpp"
#include "ibandit/envgen.hpp"

namespace ib {

enum class PoolMode { Network, Neighbor, Fixed };

PoolMode parse_pool_mode(const std::string& name);
std::string to_string(PoolMode mode);

enum class Phase { Explore, Exploit, Static };

std::string to_string(Phase phase);

/// Candidate set A_t for one round; row i of `features` is the context of
/// `ids[i]`.
struct ActionPool {
  int round = 0;
  std::vector<EdgeId> ids;
  Matrix features;
  PoolMode mode = PoolMode::Network;

  std::size_t size() const { return ids.size(); }
  /// Row of `id`, or -1 when absent.
  Eigen::Index row_of(EdgeId id) const;
  Vector context(EdgeId id) const;
};

/// Indices of the k largest scores; ties go to the smaller id.
std::vector<std::size_t> top_k_rows(std::span<const EdgeId> ids, std::span<const double> scores,
                                    int k);

/// Convenience over an ActionPool: returns edge ids rather than rows.
std::vector<EdgeId> top_k_ids(const ActionPool& pool, const Vector& scores, int k);

struct HoldoutSplit {
  std::vector<EdgeId> train;
  std::vector<EdgeId> holdout;
};

/// Uniform sample of `m_holdout` edge ids without replacement; both lists
/// are returned sorted.
HoldoutSplit split_holdout(std::size_t edge_count, std::size_t m_holdout, std::uint64_t seed);

struct EnvironmentConfig {
  PoolMode mode = PoolMode::Network;
  int pool_size = 500;
  int k = 5;
};

/// Immutable simulation environment: contexts with hidden p_true, a held-out
/// evaluation set and the pool construction rule. Episodes share one
/// instance and keep their random streams private.
class Environment {
 public:
  Environment(std::vector<EdgeContext> contexts, GroundTruth truth, HoldoutSplit split,
              EnvironmentConfig config);

  int dim() const { return dim_; }
  int k() const { return config_.k; }
  PoolMode mode() const { return config_.mode; }
  int pool_size() const { return config_.pool_size; }
  const std::vector<EdgeContext>& contexts() const { return contexts_; }
  const EdgeContext& context(EdgeId id) const { return contexts_.at(static_cast<std::size_t>(id)); }
  double p_true(EdgeId id) const { return context(id).p_true; }
  const GroundTruth& truth() const { return truth_; }
  const std::vector<EdgeId>& train_ids() const { return split_.train; }
  const std::vector<EdgeId>& holdout_ids() const { return split_.holdout; }
  bool is_holdout(EdgeId id) const { return holdout_mask_.at(static_cast<std::size_t>(id)); }

  /// Edges used for RMSE: the held-out set, or the whole training set when
  /// nothing is held out (fixed-action test mode).
  std::vector<EdgeContext> evaluation_contexts() const;

  /// Stacked training contexts (fixed mode arms).
  ActionPool training_pool(int round) const;

  ActionPool next_pool(int round, Rng& pool_rng) const;

  std::vector<int> sample_rewards(const ActionPool& pool, std::span<const EdgeId> selected,
                                  Rng& reward_rng) const;

  struct TopK {
    std::vector<EdgeId> ids;
    double value = 0.0;
  };
  TopK oracle_topk(const ActionPool& pool) const;

  /// Sum of p_true over `selected`, accumulated in ascending id order.
  double value_of(std::span<const EdgeId> selected) const;

 private:
  std::vector<EdgeContext> contexts_;
  GroundTruth truth_;
  HoldoutSplit split_;
  EnvironmentConfig config_;
  int dim_ = 0;
  std::vector<bool> holdout_mask_;
  // neighbour mode: eligible sources and their training out-edges
  std::vector<std::vector<EdgeId>> neighbor_pools_;
  Matrix train_features_;
};

// --- policy protocol ------------------------------------------------------

struct RoundDiagnostics {
  Phase phase = Phase::Static;
  double u = std::numeric_limits<double>::quiet_NaN();
  double au = std::numeric_limits<double>::quiet_NaN();
  double c = std::numeric_limits<double>::quiet_NaN();
};

/// select() is called once per round, then update() with the semi-bandit
/// feedback for exactly the edges select() returned.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;
  /// `key=value;key=value` for provenance columns.
  virtual std::string hyperparameters() const = 0;

  virtual std::vector<EdgeId> select(const ActionPool& pool) = 0;
  virtual void update(const ActionPool& pool, std::span<const EdgeId> selected,
                      std::span<const int> rewards) = 0;

  virtual RoundDiagnostics diagnostics() const { return {}; }

  /// Linear estimate, when the policy keeps one.
  virtual std::optional<Vector> theta_hat() const { return std::nullopt; }

  /// Estimated influence probability in [0, 1].
  virtual double predict(EdgeId id, const Vector& x) const = 0;
};

// --- episodes -------------------------------------------------------------

struct RoundOutcome {
  int round = 0;
  int pool_size = 0;
  std::vector<EdgeId> selected;
  std::vector<int> rewards;
  Phase phase = Phase::Static;
  double u = std::numeric_limits<double>::quiet_NaN();
  double au = std::numeric_limits<double>::quiet_NaN();
  double c = std::numeric_limits<double>::quiet_NaN();
  double oracle_value = 0.0;
  double selected_value = 0.0;

  double regret() const { return oracle_value - selected_value; }
};

struct Snapshot {
  int round = 0;
  std::optional<Vector> theta;
  double rmse = 0.0;
};

struct EpisodeSeeds {
  std::uint64_t pool = 0;
  std::uint64_t reward = 0;
};

struct RunLog {
  std::string policy;
  std::string hyperparameters;
  EpisodeSeeds seeds;
  std::vector<RoundOutcome> rounds;
  std::vector<Snapshot> snapshots;
  std::optional<Vector> final_theta;
  double final_rmse = std::numeric_limits<double>::quiet_NaN();

  double cumulative_regret() const;
  int explore_rounds() const;
};

struct EpisodeOptions {
  /// RMSE snapshot every this many rounds (0 -> ceil(T/50)), plus the final
  /// round.
  int snapshot_every = 0;
  /// Invoked after each round's update; may throw to abort the run.
  std::function<void(const RoundOutcome&, const Policy&)> observer;
};

/// Snapshot cadence used when none is configured.
int default_snapshot_every(int rounds);

RunLog run_episode(const Environment& env, Policy& policy, int rounds, EpisodeSeeds seeds,
                   const EpisodeOptions& options = {});

}  // namespace ib
