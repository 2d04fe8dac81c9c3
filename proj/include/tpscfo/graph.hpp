#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tpscfo {

using NodeId = std::uint32_t;

// Simple undirected graph in CSR form. Neighbor lists are sorted and carry no
// self-loops or duplicates. Community detection runs on this type; a
// BipartiteGraph is one with a user/item node split.
class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  // Builds from an edge list. Each undirected edge appears once; duplicates
  // and self-loops are rejected with ContractError.
  UndirectedGraph(std::size_t num_nodes, const std::vector<std::pair<NodeId, NodeId>>& edges);

  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return adjacency_.size() / 2; }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v], degree(v)};
  }
  bool has_edge(NodeId a, NodeId b) const;

  // Same graph with node v renamed to perm[v].
  UndirectedGraph relabeled(std::span<const NodeId> perm) const;
  std::vector<std::pair<NodeId, NodeId>> edge_list() const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
};

}  // namespace tpscfo
