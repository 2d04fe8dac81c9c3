#include "tpscfo/comfni.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>

#include "tpscfo/error.hpp"

namespace tpscfo {

const char* source_name(PairSource source) {
  switch (source) {
    case PairSource::kLeiden: return "leiden";
    case PairSource::kInfomap: return "infomap";
    case PairSource::kConsensus: return "consensus";
    case PairSource::kFiltered: return "filtered";
  }
  return "unknown";
}

FalseNegativePairSet::FalseNegativePairSet(std::vector<Interaction> pairs, PairSource source)
    : pairs_(std::move(pairs)), source_(source) {
  if (!std::is_sorted(pairs_.begin(), pairs_.end())) std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
}

bool FalseNegativePairSet::contains(Index u, Index i) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), Interaction{u, i});
}

std::vector<Index> FalseNegativePairSet::items_of(Index u) const {
  auto first = std::lower_bound(pairs_.begin(), pairs_.end(), Interaction{u, 0});
  std::vector<Index> items;
  for (auto it = first; it != pairs_.end() && it->user == u; ++it) items.push_back(it->item);
  return items;
}

ComfniResult comfni(const InteractionDataset& train, const Partition& p, PairSource source,
                    const ComfniOptions& options) {
  const std::size_t num_users = train.num_users();
  if (p.num_nodes() != num_users + train.num_items()) {
    throw ContractError("partition has " + std::to_string(p.num_nodes()) +
                        " nodes but the training graph has " +
                        std::to_string(num_users + train.num_items()));
  }
  ComfniResult result;
  // Item side of every enumerable community; users are then walked in index
  // order so the output comes out sorted.
  std::vector<std::vector<Index>> community_items(p.num_communities());
  std::vector<std::size_t> community_users(p.num_communities(), 0);
  for (NodeId v = 0; v < p.num_nodes(); ++v) {
    if (v < num_users) {
      ++community_users[p.label(v)];
    } else {
      community_items[p.label(v)].push_back(static_cast<Index>(v - num_users));
    }
  }
  for (std::size_t c = 0; c < community_items.size(); ++c) {
    const std::size_t n_users = community_users[c], n_items = community_items[c].size();
    if (n_users == 0 || n_items == 0) continue;
    if (options.max_pairs_per_community && n_users * n_items > *options.max_pairs_per_community) {
      result.warnings.push_back("community " + std::to_string(c) + " (" + std::to_string(n_users) +
                                " users x " + std::to_string(n_items) +
                                " items) exceeds the per-community pair cap; skipped");
      std::cerr << "warning: " << result.warnings.back() << '\n';
      community_items[c].clear();
    }
  }
  std::vector<Interaction> pairs;
  std::vector<Index> missing;
  for (Index u = 0; u < num_users; ++u) {
    const auto& items = community_items[p.label(u)];
    if (items.empty()) continue;
    auto observed = train.user_items(u);
    missing.clear();
    std::set_difference(items.begin(), items.end(), observed.begin(), observed.end(),
                        std::back_inserter(missing));
    for (auto i : missing) pairs.push_back({u, i});
  }
  result.pairs = FalseNegativePairSet(std::move(pairs), source);
  return result;
}

double fni_ratio(const FalseNegativePairSet& identified, std::span<const Interaction> planted) {
  if (planted.empty()) throw InvalidInputError("planted false-negative set is empty");
  std::size_t hits = 0;
  for (const auto& [u, i] : planted) hits += identified.contains(u, i) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(planted.size());
}

void write_pairs(const std::filesystem::path& path, std::span<const Interaction> pairs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  std::string buf;
  buf.reserve(pairs.size() * 12);
  char num[16];
  for (const auto& [u, i] : pairs) {
    buf.append(num, std::to_chars(num, num + sizeof num, u).ptr);
    buf.push_back('\t');
    buf.append(num, std::to_chars(num, num + sizeof num, i).ptr);
    buf.push_back('\n');
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<Interaction> read_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open " + path.string());
  std::vector<Interaction> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    try {
      if (tab == std::string::npos) throw std::invalid_argument("tab");
      pairs.push_back({static_cast<Index>(std::stoul(line.substr(0, tab))),
                       static_cast<Index>(std::stoul(line.substr(tab + 1)))});
    } catch (const std::logic_error&) {
      throw ParseError(path.string(), line_no, "expected \"user_index<TAB>item_index\"");
    }
  }
  return pairs;
}

}  // namespace tpscfo
