#include "ibandit/baselines.hpp"

#include <algorithm>
#include <unordered_map>

#include "ibandit/csv.hpp"

namespace ib {

StaticScorePolicy::StaticScorePolicy(std::string name, std::string hyperparameters, int k,
                                     std::vector<double> scores, std::vector<double> estimates)
    : name_(std::move(name)),
      hyperparameters_(std::move(hyperparameters)),
      k_(k),
      scores_(std::move(scores)),
      estimates_(std::move(estimates)) {
  if (scores_.size() != estimates_.size()) throw ConfigError(name_ + ": score and estimate tables differ in size");
}

std::vector<EdgeId> StaticScorePolicy::select(const ActionPool& pool) {
  Vector s(static_cast<Eigen::Index>(pool.size()));
  for (std::size_t i = 0; i < pool.size(); ++i) {
    s(static_cast<Eigen::Index>(i)) = scores_.at(static_cast<std::size_t>(pool.ids[i]));
  }
  return top_k_ids(pool, s, k_);
}

double StaticScorePolicy::predict(EdgeId id, const Vector&) const {
  return std::clamp(estimates_.at(static_cast<std::size_t>(id)), 0.0, 1.0);
}

std::unique_ptr<StaticScorePolicy> make_random_policy(std::size_t edge_count, int k, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> scores(edge_count);
  for (auto& s : scores) s = unit(rng);
  auto estimates = scores;
  return std::make_unique<StaticScorePolicy>("random", "", k, std::move(scores), std::move(estimates));
}

std::unique_ptr<StaticScorePolicy> make_similarity_policy(const std::vector<EdgeContext>& contexts,
                                                          const std::vector<NodeRecord>& nodes, int k) {
  std::unordered_map<NodeId, const Vector*> features;
  for (const auto& n : nodes) features[n.id] = &n.features;
  std::vector<double> scores(contexts.size());
  std::vector<double> estimates(contexts.size());
  for (const auto& e : contexts) {
    const auto s = features.find(e.source);
    const auto t = features.find(e.target);
    if (s == features.end() || t == features.end()) {
      throw DataError("similarity: edge " + std::to_string(e.id) + " references a node without features");
    }
    const double dist = (*s->second - *t->second).norm();
    scores.at(static_cast<std::size_t>(e.id)) = -dist;
    estimates.at(static_cast<std::size_t>(e.id)) = std::clamp(1.0 - dist / 2.0, 0.0, 1.0);
  }
  return std::make_unique<StaticScorePolicy>("similarity", "", k, std::move(scores), std::move(estimates));
}

Vector ridge_fit(const Matrix& X, const Vector& y, double lambda) {
  if (X.rows() != y.size()) throw DataError("ridge_fit: row count mismatch");
  if (!(lambda >= 0.0)) throw ConfigError("ridge_fit: lambda must be >= 0");
  Matrix gram = X.transpose() * X;
  gram.diagonal().array() += lambda;
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw SingularMatrixError("ridge_fit: singular normal equations");
  return ldlt.solve(X.transpose() * y);
}

LinkPredictionData link_prediction_data(const Graph& graph, const std::vector<NodeRecord>& nodes,
                                        const std::vector<EdgeContext>& contexts, bool structural,
                                        std::uint64_t seed) {
  const auto n = static_cast<long long>(graph.nodes.size());
  const long long non_edges = n * (n - 1) - static_cast<long long>(graph.edges.size());
  if (non_edges <= 0) throw ConfigError("ridge_linkpred: graph is complete, no non-edges to sample");
  if (contexts.empty()) throw ConfigError("ridge_linkpred: no edges");

  const auto adjacency = graph.adjacency();
  std::unordered_map<NodeId, const Vector*> features;
  for (const auto& node : nodes) features[node.id] = &node.features;

  const Eigen::Index dim = contexts.front().x.size();
  const auto rows = static_cast<Eigen::Index>(2 * contexts.size());
  LinkPredictionData data{Matrix(rows, dim), Vector::Zero(rows)};
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    data.X.row(static_cast<Eigen::Index>(i)) = contexts[i].x.transpose();
    data.y(static_cast<Eigen::Index>(i)) = 1.0;
  }

  const double scale = static_cast<double>(std::max<long long>(1, n - 2));
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, graph.nodes.size() - 1);
  for (auto r = static_cast<Eigen::Index>(contexts.size()); r < rows; ++r) {
    NodeId u = 0;
    NodeId v = 0;
    do {
      u = graph.nodes[pick(rng)];
      v = graph.nodes[pick(rng)];
    } while (u == v || adjacency.at(u).count(v) > 0);

    std::optional<double> cn;
    if (structural) {
      const auto& nu = adjacency.at(u);
      const auto& nv = adjacency.at(v);
      double common = 0.0;
      for (NodeId w : nu) common += static_cast<double>(nv.count(w));
      cn = common / scale;
    }
    const Vector x = edge_feature_vector(*features.at(u), *features.at(v), cn);
    if (x.size() != dim) throw DataError("ridge_linkpred: non-edge context dimension mismatch");
    data.X.row(r) = x.transpose();
  }
  return data;
}

std::unique_ptr<StaticScorePolicy> make_ridge_linkpred_policy(const Graph& graph,
                                                              const std::vector<NodeRecord>& nodes,
                                                              const std::vector<EdgeContext>& contexts,
                                                              bool structural, int k, double lambda,
                                                              std::uint64_t seed) {
  const auto data = link_prediction_data(graph, nodes, contexts, structural, seed);
  const Vector w = ridge_fit(data.X, data.y, lambda);
  std::vector<double> scores(contexts.size());
  for (const auto& e : contexts) scores.at(static_cast<std::size_t>(e.id)) = e.x.dot(w);
  auto estimates = scores;
  return std::make_unique<StaticScorePolicy>("ridge_linkpred", "lambda=" + csv::format_double(lambda), k,
                                             std::move(scores), std::move(estimates));
}

}  // namespace ib
