#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "ibandit/common.hpp"

namespace ib {

enum class GraphKind { ErdosRenyi, BarabasiAlbert };

GraphKind parse_graph_kind(const std::string& name);
std::string to_string(GraphKind kind);

/// A simple graph stored with both edge directions materialized.
struct Graph {
  std::vector<NodeId> nodes;                      // sorted, unique
  std::vector<std::pair<NodeId, NodeId>> edges;   // directed, lexicographic

  std::size_t undirected_edge_count() const { return edges.size() / 2; }

  /// Undirected adjacency (the graph is symmetric).
  std::map<NodeId, std::set<NodeId>> adjacency() const;
};

/// Builds a bidirected simple graph from undirected pairs. Duplicate pairs
/// collapse; self loops are rejected.
Graph make_bidirected(std::vector<NodeId> nodes,
                      const std::vector<std::pair<NodeId, NodeId>>& pairs);

/// Erdos-Renyi G(n, p) (param = p) or Barabasi-Albert with m attachments per
/// new node (param = m). BA seeds with m isolated nodes; the first arriving
/// node links to all of them, later ones pick m distinct targets with
/// probability proportional to degree, giving exactly m*(n-m) undirected
/// edges.
Graph generate_graph(GraphKind kind, int n, double param, std::uint64_t seed);

/// Writes the undirected edge list (one row per pair, source < target).
void write_edge_list(const Graph& graph, const std::filesystem::path& path);

}  // namespace ib
