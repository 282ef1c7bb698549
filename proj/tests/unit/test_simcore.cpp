#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "ibandit/oracles.hpp"
#include "ibandit/policies.hpp"
#include "ibandit/simcore.hpp"

using namespace ib;

namespace {

/// Plays whatever the environment's top-k is.
class Omniscient : public Policy {
 public:
  explicit Omniscient(const Environment& env) : env_(env) {}
  std::string name() const override { return "omniscient"; }
  std::string hyperparameters() const override { return ""; }
  std::vector<EdgeId> select(const ActionPool& pool) override { return env_.oracle_topk(pool).ids; }
  void update(const ActionPool&, std::span<const EdgeId>, std::span<const int>) override {}
  double predict(EdgeId id, const Vector&) const override { return env_.p_true(id); }

 private:
  const Environment& env_;
};

/// Returns a fixed (possibly invalid) selection.
class Scripted : public Policy {
 public:
  explicit Scripted(std::vector<EdgeId> ids) : ids_(std::move(ids)) {}
  std::string name() const override { return "scripted"; }
  std::string hyperparameters() const override { return ""; }
  std::vector<EdgeId> select(const ActionPool&) override { return ids_; }
  void update(const ActionPool&, std::span<const EdgeId>, std::span<const int>) override {}
  double predict(EdgeId, const Vector&) const override { return 0.0; }

 private:
  std::vector<EdgeId> ids_;
};

LabeledContexts probability_table(const std::vector<double>& p) {
  // One-hot contexts make any probability vector exactly linear.
  const auto n = static_cast<Eigen::Index>(p.size());
  return ibtest::linear_contexts(Matrix::Identity(n, n), Eigen::Map<const Vector>(p.data(), n));
}

NetworkData small_network(int n, int m, std::uint64_t seed) {
  NetworkSpec spec;
  spec.n = n;
  spec.graph_param = m;
  spec.d_node = 3;
  return build_network(spec, seed);
}

}  // namespace

TEST_CASE("holdout: sizes, emptiness and determinism") {
  const auto a = split_holdout(600, 500, 4);
  CHECK(a.holdout.size() == 500);
  CHECK(a.train.size() == 100);
  const auto b = split_holdout(600, 500, 4);
  CHECK(a.train == b.train);
  CHECK(a.holdout == b.holdout);
  const auto none = split_holdout(50, 0, 1);
  CHECK(none.holdout.empty());
  CHECK(none.train.size() == 50);
  CHECK_THROWS_AS(split_holdout(10, 10, 1), ConfigError);
}

TEST_CASE("pools: fixed mode always returns the whole training set") {
  auto env = ibtest::fixed_environment(probability_table({0.1, 0.2, 0.3, 0.4}), 2);
  Rng rng(1);
  for (int t = 1; t <= 5; ++t) {
    const auto pool = env.next_pool(t, rng);
    CHECK(pool.size() == 4);
    CHECK(pool.mode == PoolMode::Fixed);
  }
}

TEST_CASE("pools: neighbour mode on a star graph") {
  // Centre 0 with 6 leaves; leaves have one out-edge each, below k = 2.
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId leaf = 1; leaf <= 6; ++leaf) pairs.emplace_back(0, leaf);
  const Graph g = make_bidirected({0, 1, 2, 3, 4, 5, 6}, pairs);
  auto labeled = assign_linear_ground_truth(build_edge_contexts(g, generate_node_features(7, 2, 1), false), 2);
  std::set<EdgeId> centre_edges;
  for (const auto& c : labeled.contexts) {
    if (c.source == 0) centre_edges.insert(c.id);
  }
  const auto split = split_holdout(labeled.contexts.size(), 0, 1);
  Environment env(labeled.contexts, labeled.truth, split, {PoolMode::Neighbor, 10, 2});
  Rng rng(3);
  for (int t = 1; t <= 20; ++t) {
    const auto pool = env.next_pool(t, rng);
    CHECK(pool.size() == 6);
    for (auto id : pool.ids) CHECK(centre_edges.count(id) == 1);
  }
}

TEST_CASE("pools: neighbour mode without eligible sources is a config error") {
  const Graph g = make_bidirected({0, 1}, {{0, 1}});
  auto labeled = assign_linear_ground_truth(build_edge_contexts(g, generate_node_features(2, 2, 1), false), 2);
  const auto split = split_holdout(labeled.contexts.size(), 0, 1);
  CHECK_THROWS_AS(Environment(labeled.contexts, labeled.truth, split, {PoolMode::Neighbor, 10, 2}), ConfigError);
}

TEST_CASE("pools: network mode inclusion frequency matches pool_size / |train|") {
  const auto data = small_network(600, 9, 3);  // 2*9*591 = 10638 directed edges
  const auto split = split_holdout(data.contexts.size(), 638, 5);
  REQUIRE(split.train.size() == 10000);
  Environment env(data.contexts, data.truth, split, {PoolMode::Network, 500, 5});
  Rng rng(8);
  std::map<EdgeId, int> hits;
  const int rounds = 2000;
  for (int t = 1; t <= rounds; ++t) {
    const auto pool = env.next_pool(t, rng);
    REQUIRE(pool.size() == 500);
    for (auto id : pool.ids) {
      ++hits[id];
      REQUIRE_FALSE(env.is_holdout(id));
    }
  }
  // Pooled rate is exact; per-edge rates are Binomial(2000, 0.05) / 2000 with
  // sd ~0.0049, so about 95% of edges land within 0.01.
  double total = 0.0;
  for (const auto& [id, n] : hits) total += n;
  CHECK(total / (rounds * 10000.0) == doctest::Approx(0.05).epsilon(1e-12));
  int within = 0;
  for (EdgeId id : split.train) {
    const double f = hits[id] / static_cast<double>(rounds);
    within += std::abs(f - 0.05) <= 0.01 ? 1 : 0;
  }
  CHECK(within >= 9300);
}

TEST_CASE("pools: network pool larger than the training set is a config error") {
  const auto data = small_network(30, 2, 1);
  const auto split = split_holdout(data.contexts.size(), 0, 1);
  CHECK_THROWS_AS(Environment(data.contexts, data.truth, split, {PoolMode::Network, 100000, 5}), ConfigError);
}

TEST_CASE("rewards: empirical means at the probability floor and ceiling") {
  auto env = ibtest::fixed_environment(probability_table({0.99, 0.01}), 1);
  const auto pool = env.training_pool(1);
  Rng rng(42);
  double hi = 0.0, lo = 0.0;
  for (int i = 0; i < 10000; ++i) {
    hi += env.sample_rewards(pool, std::vector<EdgeId>{0}, rng)[0];
    lo += env.sample_rewards(pool, std::vector<EdgeId>{1}, rng)[0];
  }
  CHECK(hi / 1e4 >= 0.97);
  CHECK(lo / 1e4 <= 0.03);
}

TEST_CASE("rewards: fixed seed reproduces the sequence; foreign ids are rejected") {
  auto env = ibtest::fixed_environment(probability_table({0.3, 0.6, 0.5}), 2);
  const auto pool = env.training_pool(1);
  Rng a(9), b(9);
  const std::vector<EdgeId> sel{0, 2};
  for (int i = 0; i < 50; ++i) CHECK(env.sample_rewards(pool, sel, a) == env.sample_rewards(pool, sel, b));
  CHECK_THROWS_AS(env.sample_rewards(pool, std::vector<EdgeId>{7}, a), ProtocolError);
}

TEST_CASE("oracle top-k: direct sum and tie rule") {
  auto env = ibtest::fixed_environment(probability_table({0.9, 0.5, 0.1}), 2);
  const auto top = env.oracle_topk(env.training_pool(1));
  CHECK(top.value == doctest::Approx(1.4));
  CHECK(top.ids == std::vector<EdgeId>{0, 1});

  auto flat = ibtest::fixed_environment(probability_table({0.4, 0.4, 0.4, 0.4, 0.4}), 3);
  const auto tied = flat.oracle_topk(flat.training_pool(1));
  CHECK(tied.value == doctest::Approx(1.2));
  auto ids = tied.ids;
  std::sort(ids.begin(), ids.end());
  CHECK(ids == std::vector<EdgeId>{0, 1, 2});
}

TEST_CASE("oracle top-k: agrees with exhaustive enumeration on 20 edges") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(20);
    for (auto& v : p) v = u(rng);
    auto env = ibtest::fixed_environment(probability_table(p), 5);
    const auto top = env.oracle_topk(env.training_pool(1));
    const auto brute = oracles::brute_topk(p, 5);
    auto ids = top.ids;
    std::sort(ids.begin(), ids.end());
    CHECK(std::equal(ids.begin(), ids.end(), brute.begin(), brute.end(),
                     [](EdgeId a, std::size_t b) { return a == static_cast<EdgeId>(b); }));
    CHECK(top.value == oracles::subset_value(p, brute));
  }
}

TEST_CASE("episode: zero rounds") {
  auto env = ibtest::fixed_environment(probability_table({0.2, 0.7, 0.4}), 1);
  CombLinUcb policy(3, 1);
  const auto log = run_episode(env, policy, 0, {1, 2});
  CHECK(log.rounds.empty());
  CHECK(log.cumulative_regret() == 0.0);
  CHECK(std::isfinite(log.final_rmse));
}

TEST_CASE("episode: omniscient policy has zero regret") {
  const auto data = small_network(80, 3, 4);
  const auto split = split_holdout(data.contexts.size(), 40, 2);
  Environment env(data.contexts, data.truth, split, {PoolMode::Network, 100, 5});
  Omniscient policy(env);
  const auto log = run_episode(env, policy, 100, {5, 6});
  CHECK(log.cumulative_regret() == 0.0);
}

TEST_CASE("episode: protocol violations abort the run") {
  auto env = ibtest::fixed_environment(probability_table({0.2, 0.7, 0.4}), 2);
  Scripted dup({1, 1});
  CHECK_THROWS_AS(run_episode(env, dup, 3, {1, 2}), ProtocolError);
  Scripted short_sel({1});
  CHECK_THROWS_AS(run_episode(env, short_sel, 3, {1, 2}), ProtocolError);
  Scripted foreign({1, 9});
  CHECK_THROWS_AS(run_episode(env, foreign, 3, {1, 2}), ProtocolError);
}

TEST_CASE("episode: uniform random selection has closed-form expected regret") {
  const std::vector<double> p{0.9, 0.8, 0.6, 0.3, 0.2, 0.1};
  auto env = ibtest::fixed_environment(probability_table(p), 2);
  const double mean_p = (0.9 + 0.8 + 0.6 + 0.3 + 0.2 + 0.1) / 6.0;
  const double expected = (0.9 + 0.8) - 2.0 * mean_p;
  double total = 0.0;
  int rounds = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    UniformRandomPolicy policy(6, 2, 1.0, 1000 + s);
    const auto log = run_episode(env, policy, 200, {s, s + 77});
    total += log.cumulative_regret();
    rounds += 200;
  }
  CHECK(total / rounds == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("episode: snapshots follow the default cadence and end at T") {
  auto env = ibtest::fixed_environment(probability_table({0.2, 0.7, 0.4, 0.5}), 2);
  CombLinUcb policy(4, 2);
  const auto log = run_episode(env, policy, 120, {1, 2});
  CHECK(default_snapshot_every(120) == 3);
  REQUIRE(!log.snapshots.empty());
  CHECK(log.snapshots.front().round == 3);
  CHECK(log.snapshots.back().round == 120);
  CHECK(log.snapshots.size() == 40);
  CHECK(log.final_rmse == log.snapshots.back().rmse);
}
