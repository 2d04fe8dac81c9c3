#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tpscfo/graph.hpp"

namespace tpscfo {

using CommunityId = std::uint32_t;

// Node -> community map. Labels are dense, 0-based, and canonical: numbered
// in order of first appearance when scanning nodes 0..n-1.
class Partition {
 public:
  Partition() = default;
  // Canonicalizes arbitrary labels.
  explicit Partition(const std::vector<std::uint32_t>& raw_labels);

  static Partition singletons(std::size_t num_nodes);
  static Partition whole(std::size_t num_nodes);

  std::size_t num_nodes() const { return labels_.size(); }
  std::size_t num_communities() const { return num_communities_; }
  CommunityId label(NodeId v) const { return labels_[v]; }
  const std::vector<CommunityId>& labels() const { return labels_; }
  std::vector<std::vector<NodeId>> members() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<CommunityId> labels_;
  std::size_t num_communities_ = 0;
};

struct CommunityConfig {
  double resolution = 0.01;
  int max_passes = 20;
  double min_gain = 1e-7;
  std::uint64_t seed = 2022;

  // Throws ConfigError.
  void validate() const;
};

// Quality after every local-moving sweep (modularity or codelength in bits),
// preceded by the quality of the starting partition of each level.
struct DetectionTrace {
  std::vector<double> quality;
  int levels = 0;
};

enum class Detector { kLouvain, kLeiden, kInfomap };

// Newman modularity with resolution: Q = sum_c [e_c/m - gamma (d_c/2m)^2].
// Throws UndefinedQualityError on an edgeless graph.
double modularity(const UndirectedGraph& g, const Partition& p, double resolution);

// Two-level map equation in bits, with node visit rates deg(v)/2m and no
// teleportation. Throws UndefinedQualityError on an edgeless graph.
double map_equation(const UndirectedGraph& g, const Partition& p);

// The node visiting order a detector uses for `seed` at the first level.
std::vector<NodeId> visit_order(std::size_t num_nodes, std::uint64_t seed);

// Runs a detector with an explicit first-level visiting order. Nodes are
// processed as if renamed by their position in `order`, so relabeling the
// graph by a permutation and permuting `order` alike yields the same
// partition up to label names.
Partition detect(Detector detector, const UndirectedGraph& g, const CommunityConfig& cfg,
                 std::span<const NodeId> order, DetectionTrace* trace = nullptr);

Partition louvain(const UndirectedGraph& g, const CommunityConfig& cfg,
                  DetectionTrace* trace = nullptr);
// Louvain plus a refinement phase that merges nodes only into connected
// sub-communities; aggregation uses the refined partition. Every returned
// community induces a connected subgraph.
Partition leiden(const UndirectedGraph& g, const CommunityConfig& cfg,
                 DetectionTrace* trace = nullptr);
// Louvain-style local moving and aggregation minimizing the map equation.
Partition infomap_two_level(const UndirectedGraph& g, const CommunityConfig& cfg,
                            DetectionTrace* trace = nullptr);

bool communities_connected(const UndirectedGraph& g, const Partition& p);

// "node_index<TAB>community_id" per line.
void write_partition(const std::filesystem::path& path, const Partition& p);
Partition read_partition(const std::filesystem::path& path);

}  // namespace tpscfo
