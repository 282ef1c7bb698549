#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ibandit/envgen.hpp"
#include "ibandit/simcore.hpp"

namespace ib {

/// Non-adaptive scorer: every edge has a score fixed at construction and
/// each round plays the k best-scored pool edges. Feedback is ignored.
class StaticScorePolicy : public Policy {
 public:
  /// `scores` and `estimates` are indexed by edge id; `estimates` holds the
  /// probability reported for RMSE.
  StaticScorePolicy(std::string name, std::string hyperparameters, int k, std::vector<double> scores,
                    std::vector<double> estimates);

  std::string name() const override { return name_; }
  std::string hyperparameters() const override { return hyperparameters_; }
  std::vector<EdgeId> select(const ActionPool& pool) override;
  void update(const ActionPool&, std::span<const EdgeId>, std::span<const int>) override {}
  RoundDiagnostics diagnostics() const override { return {Phase::Static}; }
  double predict(EdgeId id, const Vector& x) const override;

  const std::vector<double>& scores() const { return scores_; }

 private:
  std::string name_;
  std::string hyperparameters_;
  int k_;
  std::vector<double> scores_;
  std::vector<double> estimates_;
};

/// Scores drawn once from U[0, 1].
std::unique_ptr<StaticScorePolicy> make_random_policy(std::size_t edge_count, int k, std::uint64_t seed);

/// Score -||f_source - f_target||; the estimate maps distance 0..2 linearly
/// onto 1..0.
std::unique_ptr<StaticScorePolicy> make_similarity_policy(const std::vector<EdgeContext>& contexts,
                                                          const std::vector<NodeRecord>& nodes, int k);

/// Closed-form ridge solution of (X^T X + lambda I) w = X^T y.
Vector ridge_fit(const Matrix& X, const Vector& y, double lambda);

struct LinkPredictionData {
  Matrix X;  // existing edges first, then sampled non-edges
  Vector y;
};

/// One row per directed edge (label 1) followed by the same number of
/// uniformly sampled ordered non-adjacent pairs (label 0). Throws
/// ConfigError when the graph has no non-edges.
LinkPredictionData link_prediction_data(const Graph& graph, const std::vector<NodeRecord>& nodes,
                                        const std::vector<EdgeContext>& contexts, bool structural,
                                        std::uint64_t seed);

std::unique_ptr<StaticScorePolicy> make_ridge_linkpred_policy(const Graph& graph,
                                                              const std::vector<NodeRecord>& nodes,
                                                              const std::vector<EdgeContext>& contexts,
                                                              bool structural, int k, double lambda,
                                                              std::uint64_t seed);

}  // namespace ib
