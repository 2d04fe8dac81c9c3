#include "tpscfo/graph.hpp"

#include <algorithm>
#include <string>

#include "tpscfo/error.hpp"

namespace tpscfo {

UndirectedGraph::UndirectedGraph(std::size_t num_nodes,
                                 const std::vector<std::pair<NodeId, NodeId>>& edges) {
  std::vector<std::size_t> degree(num_nodes, 0);
  for (const auto& [a, b] : edges) {
    if (a >= num_nodes || b >= num_nodes) {
      throw ContractError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
    if (a == b) throw ContractError("self-loop on node " + std::to_string(a));
    ++degree[a];
    ++degree[b];
  }
  offsets_.assign(num_nodes + 1, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
  adjacency_.resize(offsets_.back());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [a, b] : edges) {
    adjacency_[cursor[a]++] = b;
    adjacency_[cursor[b]++] = a;
  }
  for (std::size_t v = 0; v < num_nodes; ++v) {
    auto first = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]);
    auto last = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]);
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last) {
      throw ContractError("duplicate edge at node " + std::to_string(v));
    }
  }
}

bool UndirectedGraph::has_edge(NodeId a, NodeId b) const {
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

UndirectedGraph UndirectedGraph::relabeled(std::span<const NodeId> perm) const {
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(num_edges());
  for (const auto& [a, b] : edge_list()) edges.emplace_back(perm[a], perm[b]);
  return UndirectedGraph(num_nodes(), edges);
}

std::vector<std::pair<NodeId, NodeId>> UndirectedGraph::edge_list() const {
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(num_edges());
  for (NodeId v = 0; v < num_nodes(); ++v) {
    for (NodeId w : neighbors(v)) {
      if (v < w) edges.emplace_back(v, w);
    }
  }
  return edges;
}

}  // namespace tpscfo
