#include "ibandit/simcore.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "ibandit/metrics.hpp"

namespace ib {

PoolMode parse_pool_mode(const std::string& name) {
  if (name == "network") return PoolMode::Network;
  if (name == "neighbor") return PoolMode::Neighbor;
  if (name == "fixed") return PoolMode::Fixed;
  throw ConfigError("unknown pool mode '" + name + "'");
}

std::string to_string(PoolMode mode) {
  switch (mode) {
    case PoolMode::Network: return "network";
    case PoolMode::Neighbor: return "neighbor";
    case PoolMode::Fixed: return "fixed";
  }
  return "unknown";
}

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::Explore: return "explore";
    case Phase::Exploit: return "exploit";
    case Phase::Static: return "static";
  }
  return "unknown";
}

Eigen::Index ActionPool::row_of(EdgeId id) const {
  const auto it = std::find(ids.begin(), ids.end(), id);
  return it == ids.end() ? -1 : static_cast<Eigen::Index>(it - ids.begin());
}

Vector ActionPool::context(EdgeId id) const {
  const auto row = row_of(id);
  if (row < 0) throw ProtocolError("edge " + std::to_string(id) + " is not in the round-" + std::to_string(round) + " pool");
  return features.row(row).transpose();
}

std::vector<std::size_t> top_k_rows(std::span<const EdgeId> ids, std::span<const double> scores, int k) {
  if (ids.size() != scores.size()) throw Error("top_k_rows: size mismatch");
  if (k < 0 || static_cast<std::size_t>(k) > ids.size()) {
    throw ProtocolError("top-k: k=" + std::to_string(k) + " exceeds pool size " + std::to_string(ids.size()));
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
  order.resize(static_cast<std::size_t>(k));
  return order;
}

std::vector<EdgeId> top_k_ids(const ActionPool& pool, const Vector& scores, int k) {
  const auto rows = top_k_rows(pool.ids, std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), k);
  std::vector<EdgeId> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(pool.ids[r]);
  return out;
}

HoldoutSplit split_holdout(std::size_t edge_count, std::size_t m_holdout, std::uint64_t seed) {
  if (m_holdout >= edge_count && m_holdout > 0) {
    throw ConfigError("holdout size " + std::to_string(m_holdout) + " must be smaller than the edge count " +
                      std::to_string(edge_count));
  }
  std::vector<EdgeId> ids(edge_count);
  std::iota(ids.begin(), ids.end(), EdgeId{0});
  Rng rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  HoldoutSplit split;
  split.holdout.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(m_holdout));
  split.train.assign(ids.begin() + static_cast<std::ptrdiff_t>(m_holdout), ids.end());
  std::sort(split.holdout.begin(), split.holdout.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

Environment::Environment(std::vector<EdgeContext> contexts, GroundTruth truth, HoldoutSplit split,
                         EnvironmentConfig config)
    : contexts_(std::move(contexts)), truth_(std::move(truth)), split_(std::move(split)), config_(config) {
  if (contexts_.empty()) throw ConfigError("environment: no edge contexts");
  dim_ = static_cast<int>(contexts_.front().x.size());
  for (std::size_t i = 0; i < contexts_.size(); ++i) {
    const auto& c = contexts_[i];
    if (c.id != static_cast<EdgeId>(i)) throw DataError("environment: edge ids must be dense 0..M-1");
    if (c.x.size() != dim_) throw DataError("environment: inconsistent context dimension");
    if (!(c.p_true >= 0.0 && c.p_true <= 1.0)) {
      throw DataError("environment: edge " + std::to_string(c.id) + " has no valid p_true");
    }
  }
  if (config_.k < 1) throw ConfigError("environment: k must be >= 1");

  holdout_mask_.assign(contexts_.size(), false);
  for (EdgeId id : split_.holdout) holdout_mask_.at(static_cast<std::size_t>(id)) = true;
  for (EdgeId id : split_.train) {
    if (holdout_mask_.at(static_cast<std::size_t>(id))) throw ConfigError("environment: train and holdout overlap");
  }

  train_features_.resize(static_cast<Eigen::Index>(split_.train.size()), dim_);
  for (std::size_t i = 0; i < split_.train.size(); ++i) {
    train_features_.row(static_cast<Eigen::Index>(i)) = contexts_[static_cast<std::size_t>(split_.train[i])].x.transpose();
  }

  const auto train_size = static_cast<int>(split_.train.size());
  switch (config_.mode) {
    case PoolMode::Network:
      if (config_.pool_size > train_size) {
        throw ConfigError("environment: pool_size " + std::to_string(config_.pool_size) +
                          " exceeds the training edge count " + std::to_string(train_size));
      }
      if (config_.k > config_.pool_size) throw ConfigError("environment: k exceeds pool_size");
      break;
    case PoolMode::Fixed:
      if (config_.k > train_size) throw ConfigError("environment: k exceeds the fixed action set");
      break;
    case PoolMode::Neighbor: {
      std::map<NodeId, std::vector<EdgeId>> out_edges;
      for (EdgeId id : split_.train) out_edges[context(id).source].push_back(id);
      for (auto& [node, edges] : out_edges) {
        if (static_cast<int>(edges.size()) >= config_.k) neighbor_pools_.push_back(std::move(edges));
      }
      if (neighbor_pools_.empty()) {
        throw ConfigError("environment: no node has at least k=" + std::to_string(config_.k) +
                          " training out-edges");
      }
      break;
    }
  }
}

std::vector<EdgeContext> Environment::evaluation_contexts() const {
  const auto& ids = split_.holdout.empty() ? split_.train : split_.holdout;
  std::vector<EdgeContext> out;
  out.reserve(ids.size());
  for (EdgeId id : ids) out.push_back(context(id));
  return out;
}

ActionPool Environment::training_pool(int round) const {
  ActionPool pool;
  pool.round = round;
  pool.mode = PoolMode::Fixed;
  pool.ids = split_.train;
  pool.features = train_features_;
  return pool;
}

ActionPool Environment::next_pool(int round, Rng& pool_rng) const {
  ActionPool pool;
  pool.round = round;
  pool.mode = config_.mode;
  switch (config_.mode) {
    case PoolMode::Fixed:
      return training_pool(round);
    case PoolMode::Network: {
      std::vector<std::size_t> all(split_.train.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      std::vector<std::size_t> rows;
      rows.reserve(static_cast<std::size_t>(config_.pool_size));
      std::sample(all.begin(), all.end(), std::back_inserter(rows), config_.pool_size, pool_rng);
      pool.ids.resize(rows.size());
      pool.features.resize(static_cast<Eigen::Index>(rows.size()), dim_);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        pool.ids[i] = split_.train[rows[i]];
        pool.features.row(static_cast<Eigen::Index>(i)) = train_features_.row(static_cast<Eigen::Index>(rows[i]));
      }
      return pool;
    }
    case PoolMode::Neighbor: {
      std::uniform_int_distribution<std::size_t> pick(0, neighbor_pools_.size() - 1);
      pool.ids = neighbor_pools_[pick(pool_rng)];
      pool.features.resize(static_cast<Eigen::Index>(pool.ids.size()), dim_);
      for (std::size_t i = 0; i < pool.ids.size(); ++i) {
        pool.features.row(static_cast<Eigen::Index>(i)) = context(pool.ids[i]).x.transpose();
      }
      return pool;
    }
  }
  return pool;
}

std::vector<int> Environment::sample_rewards(const ActionPool& pool, std::span<const EdgeId> selected,
                                             Rng& reward_rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int> rewards;
  rewards.reserve(selected.size());
  for (EdgeId id : selected) {
    if (pool.row_of(id) < 0) {
      throw ProtocolError("edge " + std::to_string(id) + " was selected but is not in the round-" +
                          std::to_string(pool.round) + " pool");
    }
    rewards.push_back(unif(reward_rng) < p_true(id) ? 1 : 0);
  }
  return rewards;
}

Environment::TopK Environment::oracle_topk(const ActionPool& pool) const {
  std::vector<double> p(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) p[i] = p_true(pool.ids[i]);
  TopK top;
  for (auto r : top_k_rows(pool.ids, p, config_.k)) top.ids.push_back(pool.ids[r]);
  top.value = value_of(top.ids);
  return top;
}

double Environment::value_of(std::span<const EdgeId> selected) const {
  std::vector<EdgeId> sorted(selected.begin(), selected.end());
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (EdgeId id : sorted) total += p_true(id);
  return total;
}

double RunLog::cumulative_regret() const {
  double total = 0.0;
  for (const auto& r : rounds) total += r.regret();
  return total;
}

int RunLog::explore_rounds() const {
  return static_cast<int>(std::count_if(rounds.begin(), rounds.end(),
                                        [](const RoundOutcome& r) { return r.phase == Phase::Explore; }));
}

int default_snapshot_every(int rounds) { return std::max(1, (rounds + 49) / 50); }

namespace {

void check_selection(const ActionPool& pool, const std::vector<EdgeId>& selected, int k,
                     const std::string& policy) {
  if (static_cast<int>(selected.size()) != k) {
    throw ProtocolError(policy + " returned " + std::to_string(selected.size()) + " edges in round " +
                        std::to_string(pool.round) + ", expected " + std::to_string(k));
  }
  std::set<EdgeId> seen;
  for (EdgeId id : selected) {
    if (!seen.insert(id).second) {
      throw ProtocolError(policy + " selected edge " + std::to_string(id) + " twice in round " +
                          std::to_string(pool.round));
    }
    if (pool.row_of(id) < 0) {
      throw ProtocolError(policy + " selected edge " + std::to_string(id) + " outside the round-" +
                          std::to_string(pool.round) + " pool");
    }
  }
}

Snapshot take_snapshot(int round, const Policy& policy, const std::vector<EdgeContext>& eval) {
  Snapshot snap;
  snap.round = round;
  snap.theta = policy.theta_hat();
  snap.rmse = snap.theta ? rmse_holdout(*snap.theta, eval) : rmse_predictions(policy, eval);
  return snap;
}

}  // namespace

RunLog run_episode(const Environment& env, Policy& policy, int rounds, EpisodeSeeds seeds,
                   const EpisodeOptions& options) {
  if (rounds < 0) throw ConfigError("run_episode: negative round count");
  RunLog log;
  log.policy = policy.name();
  log.hyperparameters = policy.hyperparameters();
  log.seeds = seeds;
  log.rounds.reserve(static_cast<std::size_t>(rounds));

  Rng pool_rng(seeds.pool);
  Rng reward_rng(seeds.reward);
  const int every = options.snapshot_every > 0 ? options.snapshot_every : default_snapshot_every(rounds);
  const auto eval = env.evaluation_contexts();

  for (int t = 1; t <= rounds; ++t) {
    ActionPool pool = env.next_pool(t, pool_rng);
    for (EdgeId id : pool.ids) {
      if (env.is_holdout(id)) throw ProtocolError("held-out edge " + std::to_string(id) + " leaked into a pool");
    }

    auto selected = policy.select(pool);
    check_selection(pool, selected, env.k(), log.policy);
    auto rewards = env.sample_rewards(pool, selected, reward_rng);
    policy.update(pool, selected, rewards);

    RoundOutcome out;
    out.round = t;
    out.pool_size = static_cast<int>(pool.size());
    const auto diag = policy.diagnostics();
    out.phase = diag.phase;
    out.u = diag.u;
    out.au = diag.au;
    out.c = diag.c;
    out.oracle_value = env.oracle_topk(pool).value;
    out.selected_value = env.value_of(selected);
    out.selected = std::move(selected);
    out.rewards = std::move(rewards);
    if (out.regret() < -1e-12) {
      throw ProtocolError("negative regret in round " + std::to_string(t));
    }
    if (options.observer) options.observer(out, policy);
    log.rounds.push_back(std::move(out));

    if (t % every == 0 || t == rounds) log.snapshots.push_back(take_snapshot(t, policy, eval));
  }

  log.final_theta = policy.theta_hat();
  log.final_rmse = log.snapshots.empty() ? take_snapshot(0, policy, eval).rmse : log.snapshots.back().rmse;
  return log;
}

}  // namespace ib
