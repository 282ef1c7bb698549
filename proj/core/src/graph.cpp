#include "ibandit/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace ib {

GraphKind parse_graph_kind(const std::string& name) {
  if (name == "erdos_renyi" || name == "er") return GraphKind::ErdosRenyi;
  if (name == "barabasi_albert" || name == "ba") return GraphKind::BarabasiAlbert;
  throw ConfigError("unknown graph kind '" + name + "'");
}

std::string to_string(GraphKind kind) {
  return kind == GraphKind::ErdosRenyi ? "erdos_renyi" : "barabasi_albert";
}

std::map<NodeId, std::set<NodeId>> Graph::adjacency() const {
  std::map<NodeId, std::set<NodeId>> adj;
  for (NodeId v : nodes) adj[v];
  for (const auto& [u, v] : edges) adj[u].insert(v);
  return adj;
}

Graph make_bidirected(std::vector<NodeId> nodes,
                      const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  Graph g;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  g.nodes = std::move(nodes);

  std::set<std::pair<NodeId, NodeId>> directed;
  for (const auto& [u, v] : pairs) {
    if (u == v) throw DataError("self loop on node " + std::to_string(u));
    directed.emplace(u, v);
    directed.emplace(v, u);
  }
  g.edges.assign(directed.begin(), directed.end());
  return g;
}

namespace {

Graph erdos_renyi(int n, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("erdos_renyi: edge probability must lie in [0, 1]");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (unif(rng) < p) pairs.emplace_back(i, j);
    }
  }
  std::vector<NodeId> nodes(n);
  for (int i = 0; i < n; ++i) nodes[i] = i;
  return make_bidirected(std::move(nodes), pairs);
}

Graph barabasi_albert(int n, double param, Rng& rng) {
  const int m = static_cast<int>(param);
  if (m < 1 || static_cast<double>(m) != param) {
    throw ConfigError("barabasi_albert: attachment count must be a positive integer");
  }
  if (m >= n) throw ConfigError("barabasi_albert: attachment count must be < n");

  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(static_cast<std::size_t>(m) * (n - m));
  std::vector<NodeId> targets(m);
  for (int i = 0; i < m; ++i) targets[i] = i;
  // Each node appears once per incident edge, so uniform draws from this
  // list are degree-proportional.
  std::vector<NodeId> repeated;
  for (int source = m; source < n; ++source) {
    for (NodeId t : targets) pairs.emplace_back(t, source);
    repeated.insert(repeated.end(), targets.begin(), targets.end());
    repeated.insert(repeated.end(), m, source);

    std::set<NodeId> chosen;
    std::uniform_int_distribution<std::size_t> pick(0, repeated.size() - 1);
    while (static_cast<int>(chosen.size()) < m) chosen.insert(repeated[pick(rng)]);
    targets.assign(chosen.begin(), chosen.end());
  }
  std::vector<NodeId> nodes(n);
  for (int i = 0; i < n; ++i) nodes[i] = i;
  return make_bidirected(std::move(nodes), pairs);
}

}  // namespace

Graph generate_graph(GraphKind kind, int n, double param, std::uint64_t seed) {
  if (n < 2) throw ConfigError("generate_graph: need at least 2 nodes");
  Rng rng(seed);
  Graph g = kind == GraphKind::ErdosRenyi ? erdos_renyi(n, param, rng)
                                          : barabasi_albert(n, param, rng);
  if (g.edges.empty()) throw ConfigError("generate_graph: parameters produced an empty edge set");
  return g;
}

void write_edge_list(const Graph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "source,target\n";
  for (const auto& [u, v] : graph.edges) {
    if (u < v) out << u << ',' << v << '\n';
  }
}

}  // namespace ib
