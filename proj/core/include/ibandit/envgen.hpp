#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ibandit/common.hpp"
#include "ibandit/graph.hpp"

namespace ib {

/// Lower/upper margin of every generated influence probability.
inline constexpr double kProbabilityFloor = 0.01;

struct NodeRecord {
  NodeId id = 0;
  Vector features;
};

/// One directed edge. `x` = [features(source), features(target),
/// (common-neighbour count / (n-2)), 1]. The trailing 1 is the bias
/// coordinate that makes an affinely scaled linear truth realizable.
struct EdgeContext {
  EdgeId id = 0;
  NodeId source = 0;
  NodeId target = 0;
  Vector x;
  double p_true = std::numeric_limits<double>::quiet_NaN();
};

/// i.i.d. U[-1, 1] entries, each vector rescaled to unit norm. Ids 0..n-1.
std::vector<NodeRecord> generate_node_features(int n, int d_node, std::uint64_t seed);

/// Context layout for a single (source, target) pair; shared by edge
/// construction and the link-prediction baseline's non-edge samples.
Vector edge_feature_vector(const Vector& source_features, const Vector& target_features,
                           std::optional<double> structural);

/// Contexts for every directed edge, ids dense in (source, target) order.
std::vector<EdgeContext> build_edge_contexts(const Graph& graph, const std::vector<NodeRecord>& nodes,
                                             bool include_common_neighbors);

double max_context_norm(const std::vector<EdgeContext>& contexts);

enum class TruthKind { Linear, Mlp };

TruthKind parse_truth_kind(const std::string& name);
std::string to_string(TruthKind kind);

/// d -> 128 -> 64 -> 1 tanh network used for the misspecified ground truth.
struct MlpWeights {
  Matrix w1;  // 128 x d
  Vector b1;
  Matrix w2;  // 64 x 128
  Vector b2;
  Vector w3;  // 64
  double b3 = 0.0;

  static MlpWeights random(int input_dim, Rng& rng);
  static MlpWeights zeros(int input_dim);

  int input_dim() const { return static_cast<int>(w1.cols()); }
  double logit(const Vector& x) const;
};

struct GroundTruth {
  TruthKind kind = TruthKind::Linear;
  Vector theta_star;                // linear only
  std::optional<MlpWeights> mlp;    // mlp only
  double tau = 4.0;

  /// Influence probability the generator assigns to context `x`.
  double probability(const Vector& x) const;
};

struct LabeledContexts {
  std::vector<EdgeContext> contexts;
  GroundTruth truth;
};

/// Draws w ~ U[-1,1] over the non-bias coordinates and min-max scales
/// s = w^T x over all edges into [0.01, 0.99]. The affine map is folded into
/// theta_star so p_true == x^T theta_star for every edge.
LabeledContexts assign_linear_ground_truth(std::vector<EdgeContext> contexts, std::uint64_t seed);

/// As above with a caller-supplied score direction (bias entry ignored).
LabeledContexts assign_linear_ground_truth(std::vector<EdgeContext> contexts, const Vector& w);

/// p = sigmoid(z / tau), z from a random tanh MLP; clamped to [0.01, 0.99].
LabeledContexts assign_mlp_ground_truth(std::vector<EdgeContext> contexts, std::uint64_t seed,
                                        double tau = 4.0);
LabeledContexts assign_mlp_ground_truth(std::vector<EdgeContext> contexts, MlpWeights weights,
                                        double tau);

/// M unit-norm arms x = (u, 1)/sqrt(2) in R^d with u uniform on the unit
/// sphere of R^{d-1}. Probabilities min-max scale a random linear score into
/// [0.01, 0.99] and are realizable by theta_star. Ids 0..M-1; source and
/// target are -1 since the arms are not graph edges.
LabeledContexts generate_unit_arms(int m, int d, std::uint64_t seed);

struct ExternalNetwork {
  Graph graph;
  std::vector<NodeRecord> nodes;
};

/// Reads `source,target` edges (undirected, symmetrized) and
/// `node_id,f0,...` features.
ExternalNetwork load_external(const std::filesystem::path& edge_list,
                              const std::filesystem::path& node_features);

void write_node_features(const std::vector<NodeRecord>& nodes, const std::filesystem::path& path);

/// edge_id,source,target,p_true
void write_edge_truth(const std::vector<EdgeContext>& contexts, const std::filesystem::path& path);

// --- bundled environment construction -------------------------------------

struct NetworkSpec {
  bool external = false;
  GraphKind graph_kind = GraphKind::BarabasiAlbert;
  int n = 500;
  double graph_param = 10;
  int d_node = 8;
  bool structural = true;
  TruthKind truth = TruthKind::Linear;
  double tau = 4.0;
  std::filesystem::path edges_path;
  std::filesystem::path features_path;
};

struct NetworkData {
  Graph graph;
  std::vector<NodeRecord> nodes;
  std::vector<EdgeContext> contexts;
  GroundTruth truth;
  double norm_bound = 0.0;  // max ||x||_2
};

NetworkData build_network(const NetworkSpec& spec, std::uint64_t seed);

/// Flat key=value manifest describing a generated environment.
void write_manifest(const NetworkSpec& spec, const NetworkData& data, std::uint64_t seed,
                    const std::filesystem::path& path);

}  // namespace ib
