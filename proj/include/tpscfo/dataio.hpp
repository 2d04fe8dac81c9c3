#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tpscfo/graph.hpp"

namespace tpscfo {

using Index = std::uint32_t;

struct Interaction {
  Index user = 0;
  Index item = 0;
  friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

enum class Role { kTrain, kValidation, kTest, kFull };

const char* role_name(Role role);

// Binary implicit-feedback matrix R stored as a sorted (user, item) list with
// per-user offsets, so S_u is a contiguous sorted span.
class InteractionDataset {
 public:
  InteractionDataset() = default;
  // Validates index bounds and rejects duplicate pairs. A kTrain dataset must
  // be non-empty.
  InteractionDataset(std::size_t num_users, std::size_t num_items,
                     std::vector<Interaction> interactions, Role role);

  std::size_t num_users() const { return num_users_; }
  std::size_t num_items() const { return num_items_; }
  std::size_t size() const { return interactions_.size(); }
  bool empty() const { return interactions_.empty(); }
  Role role() const { return role_; }
  const std::vector<Interaction>& interactions() const { return interactions_; }

  // Items of user u in ascending order.
  std::span<const Index> user_items(Index u) const;
  bool contains(Index u, Index i) const;

  InteractionDataset with_role(Role role) const;
  // Same pairs in a larger index space (users/items seen only in other files).
  InteractionDataset resized(std::size_t num_users, std::size_t num_items) const;

 private:
  std::size_t num_users_ = 0;
  std::size_t num_items_ = 0;
  std::vector<Interaction> interactions_;
  std::vector<std::size_t> user_offsets_;
  std::vector<Index> items_;
  Role role_ = Role::kFull;
};

// Original string id <-> dense index, in first-appearance order.
class IdMap {
 public:
  Index get_or_add(const std::string& id);
  std::optional<Index> find(const std::string& id) const;
  const std::string& id(Index index) const { return ids_[index]; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, Index> index_;
};

struct IdMaps {
  IdMap users;
  IdMap items;
};

// Reads "user_id<TAB>item_id" lines, extending `ids` with unseen ids.
// Duplicate lines collapse. Throws ParseError (with line number) on a line
// without exactly two fields and EmptyDatasetError on a file with no pairs.
InteractionDataset load_dataset(const std::filesystem::path& path, IdMaps& ids);
InteractionDataset load_dataset(const std::filesystem::path& path);

void write_dataset(const std::filesystem::path& path, const InteractionDataset& ds,
                   const IdMaps& ids);
// "index<TAB>original_id" per line.
void write_id_map(const std::filesystem::path& path, const IdMap& map);
IdMap read_id_map(const std::filesystem::path& path);

struct SplitRatios {
  double train = 0.7;
  double test = 0.1;
  double val = 0.2;
};

struct DatasetSplit {
  InteractionDataset train;
  InteractionDataset test;
  InteractionDataset val;
};

// Global pair-level random split. test/val get floor(ratio * |R|) pairs, the
// remainder goes to train.
DatasetSplit split_dataset(const InteractionDataset& ds, const SplitRatios& ratios,
                           std::uint64_t seed);

enum class NodeKind : std::uint8_t { kUser, kItem };

// User u is node u, item i is node num_users + i.
class BipartiteGraph {
 public:
  BipartiteGraph(std::size_t num_users, std::size_t num_items, UndirectedGraph graph);

  const UndirectedGraph& graph() const { return graph_; }
  std::size_t num_users() const { return num_users_; }
  std::size_t num_items() const { return num_items_; }
  std::size_t num_nodes() const { return graph_.num_nodes(); }
  std::size_t num_edges() const { return graph_.num_edges(); }
  NodeKind node_kind(NodeId v) const { return v < num_users_ ? NodeKind::kUser : NodeKind::kItem; }
  NodeId user_node(Index u) const { return u; }
  NodeId item_node(Index i) const { return static_cast<NodeId>(num_users_ + i); }

 private:
  std::size_t num_users_;
  std::size_t num_items_;
  UndirectedGraph graph_;
};

BipartiteGraph build_bipartite(const InteractionDataset& ds);

}  // namespace tpscfo
