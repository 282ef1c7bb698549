#include "ibandit/envgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "ibandit/csv.hpp"
#include "ibandit/seeds.hpp"

namespace ib {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void fill_uniform(Matrix& m, Rng& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = unif(rng);
  }
}

void fill_uniform(Vector& v, Rng& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = unif(rng);
}

}  // namespace

std::vector<NodeRecord> generate_node_features(int n, int d_node, std::uint64_t seed) {
  if (n < 1 || d_node < 1) throw ConfigError("generate_node_features: n and d_node must be >= 1");
  Rng rng(seed);
  std::vector<NodeRecord> nodes(n);
  for (int i = 0; i < n; ++i) {
    nodes[i].id = i;
    nodes[i].features.resize(d_node);
    do {
      fill_uniform(nodes[i].features, rng);
    } while (nodes[i].features.norm() == 0.0);
    nodes[i].features.normalize();
  }
  return nodes;
}

Vector edge_feature_vector(const Vector& source_features, const Vector& target_features,
                           std::optional<double> structural) {
  const Eigen::Index dn = source_features.size();
  Vector x(2 * dn + (structural ? 1 : 0) + 1);
  x.head(dn) = source_features;
  x.segment(dn, dn) = target_features;
  if (structural) x(2 * dn) = *structural;
  x(x.size() - 1) = 1.0;
  return x;
}

std::vector<EdgeContext> build_edge_contexts(const Graph& graph, const std::vector<NodeRecord>& nodes,
                                             bool include_common_neighbors) {
  std::map<NodeId, const NodeRecord*> by_id;
  for (const auto& rec : nodes) by_id[rec.id] = &rec;
  auto features_of = [&](NodeId v) -> const Vector& {
    const auto it = by_id.find(v);
    if (it == by_id.end()) throw DataError("missing features for node " + std::to_string(v));
    return it->second->features;
  };

  std::map<NodeId, std::set<NodeId>> adj;
  double denom = 1.0;
  if (include_common_neighbors) {
    adj = graph.adjacency();
    denom = std::max<double>(1.0, static_cast<double>(graph.nodes.size()) - 2.0);
  }

  std::vector<EdgeContext> contexts;
  contexts.reserve(graph.edges.size());
  EdgeId next_id = 0;
  for (const auto& [u, v] : graph.edges) {
    std::optional<double> structural;
    if (include_common_neighbors) {
      const auto& nu = adj[u];
      const auto& nv = adj[v];
      std::size_t common = 0;
      for (NodeId w : nu) common += nv.count(w);
      structural = static_cast<double>(common) / denom;
    }
    EdgeContext ctx;
    ctx.id = next_id++;
    ctx.source = u;
    ctx.target = v;
    ctx.x = edge_feature_vector(features_of(u), features_of(v), structural);
    contexts.push_back(std::move(ctx));
  }
  return contexts;
}

double max_context_norm(const std::vector<EdgeContext>& contexts) {
  double c = 0.0;
  for (const auto& ctx : contexts) c = std::max(c, ctx.x.norm());
  return c;
}

TruthKind parse_truth_kind(const std::string& name) {
  if (name == "linear") return TruthKind::Linear;
  if (name == "mlp") return TruthKind::Mlp;
  throw ConfigError("unknown ground truth kind '" + name + "'");
}

std::string to_string(TruthKind kind) { return kind == TruthKind::Linear ? "linear" : "mlp"; }

MlpWeights MlpWeights::random(int input_dim, Rng& rng) {
  MlpWeights w = zeros(input_dim);
  fill_uniform(w.w1, rng);
  fill_uniform(w.b1, rng);
  fill_uniform(w.w2, rng);
  fill_uniform(w.b2, rng);
  fill_uniform(w.w3, rng);
  w.b3 = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  return w;
}

MlpWeights MlpWeights::zeros(int input_dim) {
  MlpWeights w;
  w.w1 = Matrix::Zero(128, input_dim);
  w.b1 = Vector::Zero(128);
  w.w2 = Matrix::Zero(64, 128);
  w.b2 = Vector::Zero(64);
  w.w3 = Vector::Zero(64);
  w.b3 = 0.0;
  return w;
}

double MlpWeights::logit(const Vector& x) const {
  const Vector h1 = (w1 * x + b1).array().tanh().matrix();
  const Vector h2 = (w2 * h1 + b2).array().tanh().matrix();
  return w3.dot(h2) + b3;
}

double GroundTruth::probability(const Vector& x) const {
  if (kind == TruthKind::Linear) return x.dot(theta_star);
  const double p = sigmoid(mlp->logit(x) / tau);
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

LabeledContexts assign_linear_ground_truth(std::vector<EdgeContext> contexts, std::uint64_t seed) {
  if (contexts.empty()) throw EnvironmentError("linear ground truth: no contexts");
  const auto d = contexts.front().x.size();
  Rng rng(seed);
  Vector w(d);
  fill_uniform(w, rng);
  w(d - 1) = 0.0;
  return assign_linear_ground_truth(std::move(contexts), w);
}

LabeledContexts assign_linear_ground_truth(std::vector<EdgeContext> contexts, const Vector& w_in) {
  if (contexts.size() < 2) throw EnvironmentError("linear ground truth: need at least 2 edges");
  const auto d = contexts.front().x.size();
  if (w_in.size() != d) throw ConfigError("linear ground truth: weight dimension mismatch");
  Vector w = w_in;
  w(d - 1) = 0.0;

  std::vector<double> scores(contexts.size());
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const auto& x = contexts[i].x;
    if (x.size() != d || x(d - 1) != 1.0) {
      throw DataError("linear ground truth: edge " + std::to_string(contexts[i].id) +
                      " lacks the trailing bias coordinate");
    }
    scores[i] = w.dot(x);
  }
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw EnvironmentError("linear ground truth: all scores equal; re-seed");

  const double span = 1.0 - 2.0 * kProbabilityFloor;
  const double slope = span / (hi - lo);
  GroundTruth truth;
  truth.kind = TruthKind::Linear;
  truth.theta_star = slope * w;
  truth.theta_star(d - 1) = kProbabilityFloor - slope * lo;

  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const double p = kProbabilityFloor + span * (scores[i] - lo) / (hi - lo);
    contexts[i].p_true = std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
  }
  return {std::move(contexts), std::move(truth)};
}

LabeledContexts generate_unit_arms(int m, int d, std::uint64_t seed) {
  if (m < 2 || d < 2) throw ConfigError("unit arms: need at least 2 arms and d >= 2");
  Rng rng(seed);
  const double root2 = std::sqrt(2.0);
  std::vector<EdgeContext> arms(static_cast<std::size_t>(m));
  std::vector<Vector> directions(arms.size());
  for (std::size_t i = 0; i < arms.size(); ++i) {
    Vector u(d - 1);
    do {
      fill_uniform(u, rng);
    } while (u.norm() == 0.0);
    u.normalize();
    directions[i] = u;
    arms[i].id = static_cast<EdgeId>(i);
    arms[i].source = -1;
    arms[i].target = -1;
    arms[i].x.resize(d);
    arms[i].x.head(d - 1) = u / root2;
    arms[i].x(d - 1) = 1.0 / root2;
  }

  Vector w(d - 1);
  fill_uniform(w, rng);
  std::vector<double> scores(arms.size());
  for (std::size_t i = 0; i < arms.size(); ++i) scores[i] = w.dot(directions[i]);
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw EnvironmentError("unit arms: all scores equal; re-seed");

  const double span = 1.0 - 2.0 * kProbabilityFloor;
  const double slope = span / (hi - lo);
  const double offset = kProbabilityFloor - slope * lo;
  GroundTruth truth;
  truth.kind = TruthKind::Linear;
  truth.theta_star.resize(d);
  truth.theta_star.head(d - 1) = root2 * slope * w;
  truth.theta_star(d - 1) = root2 * offset;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    arms[i].p_true = std::clamp(slope * scores[i] + offset, kProbabilityFloor, 1.0 - kProbabilityFloor);
  }
  return {std::move(arms), std::move(truth)};
}

LabeledContexts assign_mlp_ground_truth(std::vector<EdgeContext> contexts, std::uint64_t seed,
                                        double tau) {
  if (contexts.empty()) throw EnvironmentError("mlp ground truth: no contexts");
  Rng rng(seed);
  auto weights = MlpWeights::random(static_cast<int>(contexts.front().x.size()), rng);
  return assign_mlp_ground_truth(std::move(contexts), std::move(weights), tau);
}

LabeledContexts assign_mlp_ground_truth(std::vector<EdgeContext> contexts, MlpWeights weights,
                                        double tau) {
  if (!(tau > 0.0)) throw ConfigError("mlp ground truth: tau must be > 0");
  GroundTruth truth;
  truth.kind = TruthKind::Mlp;
  truth.tau = tau;
  truth.mlp = std::move(weights);
  for (auto& ctx : contexts) {
    if (ctx.x.size() != truth.mlp->input_dim()) {
      throw ConfigError("mlp ground truth: context dimension " + std::to_string(ctx.x.size()) +
                        " does not match network input width " +
                        std::to_string(truth.mlp->input_dim()));
    }
    ctx.p_true = truth.probability(ctx.x);
  }
  return {std::move(contexts), std::move(truth)};
}

ExternalNetwork load_external(const std::filesystem::path& edge_list,
                              const std::filesystem::path& node_features) {
  const auto features = csv::read(node_features);
  if (features.header.size() < 2 || features.header[0] != "node_id") {
    throw DataError(node_features.filename().string() + ": header must be node_id,f0,...");
  }
  for (std::size_t j = 1; j < features.header.size(); ++j) {
    if (features.header[j] != "f" + std::to_string(j - 1)) {
      throw DataError(node_features.filename().string() + ": unexpected column '" +
                      features.header[j] + "'");
    }
  }
  ExternalNetwork net;
  std::set<NodeId> ids;
  const int d = static_cast<int>(features.header.size()) - 1;
  for (std::size_t r = 0; r < features.rows.size(); ++r) {
    const auto where = node_features.filename().string() + " line " + std::to_string(features.line_numbers[r]);
    const auto& row = features.rows[r];
    NodeRecord rec;
    rec.id = csv::parse_int(row[0], where);
    if (!ids.insert(rec.id).second) throw DataError(where + ": duplicate node_id " + row[0]);
    rec.features.resize(d);
    for (int j = 0; j < d; ++j) rec.features(j) = csv::parse_double(row[j + 1], where);
    if (!rec.features.allFinite()) throw DataError(where + ": non-finite feature");
    net.nodes.push_back(std::move(rec));
  }

  const auto edges = csv::read(edge_list);
  if (edges.header != std::vector<std::string>{"source", "target"}) {
    throw DataError(edge_list.filename().string() + ": header must be source,target");
  }
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t r = 0; r < edges.rows.size(); ++r) {
    const auto where = edge_list.filename().string() + " line " + std::to_string(edges.line_numbers[r]);
    const NodeId u = csv::parse_int(edges.rows[r][0], where);
    const NodeId v = csv::parse_int(edges.rows[r][1], where);
    for (NodeId node : {u, v}) {
      if (!ids.count(node)) throw DataError(where + ": unknown node " + std::to_string(node));
    }
    if (u == v) throw DataError(where + ": self loop on node " + std::to_string(u));
    pairs.emplace_back(u, v);
  }
  std::sort(net.nodes.begin(), net.nodes.end(),
            [](const NodeRecord& a, const NodeRecord& b) { return a.id < b.id; });
  net.graph = make_bidirected(std::vector<NodeId>(ids.begin(), ids.end()), pairs);
  if (net.graph.edges.empty()) throw DataError(edge_list.filename().string() + ": no edges");
  return net;
}

void write_node_features(const std::vector<NodeRecord>& nodes, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  const auto d = nodes.empty() ? 0 : nodes.front().features.size();
  out << "node_id";
  for (Eigen::Index j = 0; j < d; ++j) out << ",f" << j;
  out << '\n';
  for (const auto& rec : nodes) {
    out << rec.id;
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << csv::format_double(rec.features(j));
    out << '\n';
  }
}

void write_edge_truth(const std::vector<EdgeContext>& contexts, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "edge_id,source,target,p_true\n";
  for (const auto& ctx : contexts) {
    out << ctx.id << ',' << ctx.source << ',' << ctx.target << ',' << csv::format_double(ctx.p_true) << '\n';
  }
}

NetworkData build_network(const NetworkSpec& spec, std::uint64_t seed) {
  NetworkData data;
  if (spec.external) {
    auto ext = load_external(spec.edges_path, spec.features_path);
    data.graph = std::move(ext.graph);
    data.nodes = std::move(ext.nodes);
  } else {
    data.graph = generate_graph(spec.graph_kind, spec.n, spec.graph_param, derive_seed(seed, 1));
    data.nodes = generate_node_features(spec.n, spec.d_node, derive_seed(seed, 2));
  }
  auto contexts = build_edge_contexts(data.graph, data.nodes, spec.structural);
  auto labeled = spec.truth == TruthKind::Linear
                     ? assign_linear_ground_truth(std::move(contexts), derive_seed(seed, 3))
                     : assign_mlp_ground_truth(std::move(contexts), derive_seed(seed, 3), spec.tau);
  data.contexts = std::move(labeled.contexts);
  data.truth = std::move(labeled.truth);
  data.norm_bound = max_context_norm(data.contexts);
  return data;
}

void write_manifest(const NetworkSpec& spec, const NetworkData& data, std::uint64_t seed,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "seed=" << seed << '\n';
  out << "source=" << (spec.external ? "external" : "synthetic") << '\n';
  if (!spec.external) {
    out << "graph=" << to_string(spec.graph_kind) << '\n';
    out << "graph_param=" << csv::format_double(spec.graph_param) << '\n';
  }
  out << "kind=" << to_string(data.truth.kind) << '\n';
  out << "n=" << data.graph.nodes.size() << '\n';
  out << "edges=" << data.contexts.size() << '\n';
  out << "d=" << (data.contexts.empty() ? 0 : data.contexts.front().x.size()) << '\n';
  out << "d_node=" << (data.nodes.empty() ? 0 : data.nodes.front().features.size()) << '\n';
  out << "structural=" << (spec.structural ? "true" : "false") << '\n';
  out << "c=" << csv::format_double(data.norm_bound) << '\n';
  out << "p_floor=" << csv::format_double(kProbabilityFloor) << '\n';
  if (data.truth.kind == TruthKind::Mlp) out << "tau=" << csv::format_double(data.truth.tau) << '\n';
}

}  // namespace ib
