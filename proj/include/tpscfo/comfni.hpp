#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tpscfo/community.hpp"
#include "tpscfo/dataio.hpp"

namespace tpscfo {

enum class PairSource { kLeiden, kInfomap, kConsensus, kFiltered };

const char* source_name(PairSource source);

// Sorted, duplicate-free set of (user, item) pairs.
class FalseNegativePairSet {
 public:
  FalseNegativePairSet() = default;
  FalseNegativePairSet(std::vector<Interaction> pairs, PairSource source);

  const std::vector<Interaction>& pairs() const { return pairs_; }
  PairSource source() const { return source_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  bool contains(Index u, Index i) const;
  // Items paired with user u, ascending.
  std::vector<Index> items_of(Index u) const;

 private:
  std::vector<Interaction> pairs_;
  PairSource source_ = PairSource::kConsensus;
};

struct ComfniOptions {
  // Communities whose user x item product exceeds the cap are skipped and
  // reported in `skipped`; unset means no cap.
  std::optional<std::size_t> max_pairs_per_community;
};

struct ComfniResult {
  FalseNegativePairSet pairs;
  std::vector<std::string> warnings;
};

// Every non-interacted (user, item) pair whose endpoints share a community of
// `p`, a partition of build_bipartite(train). Enumerated per community.
ComfniResult comfni(const InteractionDataset& train, const Partition& p, PairSource source,
                    const ComfniOptions& options = {});

// |identified ∩ planted| / |planted|. Throws InvalidInputError if planted is
// empty.
double fni_ratio(const FalseNegativePairSet& identified, std::span<const Interaction> planted);

// "user_index<TAB>item_index" per line.
void write_pairs(const std::filesystem::path& path, std::span<const Interaction> pairs);
std::vector<Interaction> read_pairs(const std::filesystem::path& path);

}  // namespace tpscfo
