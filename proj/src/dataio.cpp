#include "tpscfo/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "tpscfo/error.hpp"
#include "tpscfo/rng.hpp"

namespace tpscfo {

const char* role_name(Role role) {
  switch (role) {
    case Role::kTrain: return "train";
    case Role::kValidation: return "validation";
    case Role::kTest: return "test";
    case Role::kFull: return "full";
  }
  return "unknown";
}

InteractionDataset::InteractionDataset(std::size_t num_users, std::size_t num_items,
                                       std::vector<Interaction> interactions, Role role)
    : num_users_(num_users), num_items_(num_items), interactions_(std::move(interactions)),
      role_(role) {
  std::sort(interactions_.begin(), interactions_.end());
  if (std::adjacent_find(interactions_.begin(), interactions_.end()) != interactions_.end()) {
    throw ContractError("duplicate (user, item) pair in interaction set");
  }
  if (role_ == Role::kTrain && interactions_.empty()) {
    throw EmptyDatasetError("training interaction set is empty");
  }
  user_offsets_.assign(num_users_ + 1, 0);
  items_.reserve(interactions_.size());
  for (const auto& [u, i] : interactions_) {
    if (u >= num_users_ || i >= num_items_) {
      throw ContractError("interaction (" + std::to_string(u) + ", " + std::to_string(i) +
                          ") outside " + std::to_string(num_users_) + " x " +
                          std::to_string(num_items_));
    }
    ++user_offsets_[u + 1];
    items_.push_back(i);
  }
  for (std::size_t u = 0; u < num_users_; ++u) user_offsets_[u + 1] += user_offsets_[u];
}

std::span<const Index> InteractionDataset::user_items(Index u) const {
  if (u >= num_users_) return {};
  return {items_.data() + user_offsets_[u], user_offsets_[u + 1] - user_offsets_[u]};
}

bool InteractionDataset::contains(Index u, Index i) const {
  auto items = user_items(u);
  return std::binary_search(items.begin(), items.end(), i);
}

InteractionDataset InteractionDataset::with_role(Role role) const {
  return InteractionDataset(num_users_, num_items_, interactions_, role);
}

InteractionDataset InteractionDataset::resized(std::size_t num_users, std::size_t num_items) const {
  if (num_users < num_users_ || num_items < num_items_) {
    throw ContractError("resized() cannot shrink a dataset");
  }
  return InteractionDataset(num_users, num_items, interactions_, role_);
}

Index IdMap::get_or_add(const std::string& id) {
  auto [it, inserted] = index_.try_emplace(id, static_cast<Index>(ids_.size()));
  if (inserted) ids_.push_back(id);
  return it->second;
}

std::optional<Index> IdMap::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  return out;
}

// Splits on tabs; returns false unless there are exactly two non-empty fields.
bool split_two(const std::string& line, std::string& a, std::string& b) {
  auto tab = line.find('\t');
  if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) return false;
  a = line.substr(0, tab);
  b = line.substr(tab + 1);
  return !a.empty() && !b.empty();
}

}  // namespace

InteractionDataset load_dataset(const std::filesystem::path& path, IdMaps& ids) {
  auto in = open_input(path);
  std::vector<Interaction> pairs;
  std::string line, user, item;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!split_two(line, user, item)) {
      throw ParseError(path.string(), line_no, "expected \"user_id<TAB>item_id\", got \"" + line + "\"");
    }
    pairs.push_back({ids.users.get_or_add(user), ids.items.get_or_add(item)});
  }
  if (pairs.empty()) throw EmptyDatasetError("no interactions in " + path.string());
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return InteractionDataset(ids.users.size(), ids.items.size(), std::move(pairs), Role::kFull);
}

InteractionDataset load_dataset(const std::filesystem::path& path) {
  IdMaps ids;
  return load_dataset(path, ids);
}

void write_dataset(const std::filesystem::path& path, const InteractionDataset& ds,
                   const IdMaps& ids) {
  auto out = open_output(path);
  for (const auto& [u, i] : ds.interactions()) {
    out << ids.users.id(u) << '\t' << ids.items.id(i) << '\n';
  }
}

void write_id_map(const std::filesystem::path& path, const IdMap& map) {
  auto out = open_output(path);
  for (std::size_t k = 0; k < map.size(); ++k) out << k << '\t' << map.id(static_cast<Index>(k)) << '\n';
}

IdMap read_id_map(const std::filesystem::path& path) {
  auto in = open_input(path);
  IdMap map;
  std::string line, index, id;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!split_two(line, index, id) || std::to_string(map.size()) != index) {
      throw ParseError(path.string(), line_no, "expected \"" + std::to_string(map.size()) + "<TAB>id\"");
    }
    map.get_or_add(id);
  }
  return map;
}

DatasetSplit split_dataset(const InteractionDataset& ds, const SplitRatios& ratios,
                           std::uint64_t seed) {
  if (!(ratios.train > 0.0) || !(ratios.test > 0.0) || !(ratios.val > 0.0)) {
    throw ConfigError("split ratios must all be positive");
  }
  if (std::abs(ratios.train + ratios.test + ratios.val - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1");
  }
  if (ds.role() != Role::kFull) throw ContractError("split_dataset expects a full dataset");

  std::vector<Interaction> pairs = ds.interactions();
  Rng rng(seed);
  rng.shuffle(pairs);
  const double n = static_cast<double>(pairs.size());
  const auto n_test = static_cast<std::size_t>(std::floor(ratios.test * n + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(ratios.val * n + 1e-9));
  const std::size_t n_train = pairs.size() - n_test - n_val;

  auto slice = [&](std::size_t from, std::size_t count, Role role) {
    std::vector<Interaction> part(pairs.begin() + static_cast<std::ptrdiff_t>(from),
                                  pairs.begin() + static_cast<std::ptrdiff_t>(from + count));
    return InteractionDataset(ds.num_users(), ds.num_items(), std::move(part), role);
  };
  return DatasetSplit{slice(0, n_train, Role::kTrain), slice(n_train, n_test, Role::kTest),
                      slice(n_train + n_test, n_val, Role::kValidation)};
}

BipartiteGraph::BipartiteGraph(std::size_t num_users, std::size_t num_items, UndirectedGraph graph)
    : num_users_(num_users), num_items_(num_items), graph_(std::move(graph)) {
  if (graph_.num_nodes() != num_users + num_items) {
    throw ContractError("bipartite graph node count does not match users + items");
  }
}

BipartiteGraph build_bipartite(const InteractionDataset& ds) {
  if (ds.empty()) throw EmptyDatasetError("cannot build a bipartite graph from no interactions");
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(ds.size());
  const auto offset = static_cast<NodeId>(ds.num_users());
  for (const auto& [u, i] : ds.interactions()) edges.emplace_back(u, offset + i);
  return BipartiteGraph(ds.num_users(), ds.num_items(),
                        UndirectedGraph(ds.num_users() + ds.num_items(), edges));
}

}  // namespace tpscfo
