#include "tpscfo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tpscfo/error.hpp"
#include "tpscfo/rng.hpp"

namespace tpscfo {

void PlantedSpec::validate() const {
  if (num_communities < 1 || users_per_comm < 1 || items_per_comm < 1) {
    throw ConfigError("planted community counts must be >= 1");
  }
  if (!(p_out >= 0.0 && p_out < p_in && p_in <= 1.0)) {
    throw ConfigError("planted probabilities need 0 <= p_out < p_in <= 1");
  }
}

PlantedData generate_planted(const PlantedSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<Interaction> pairs;
  for (Index u = 0; u < spec.num_users(); ++u) {
    const std::size_t cu = u / spec.users_per_comm;
    for (Index i = 0; i < spec.num_items(); ++i) {
      const double p = (i / spec.items_per_comm == cu) ? spec.p_in : spec.p_out;
      if (rng.bernoulli(p)) pairs.push_back({u, i});
    }
  }
  std::vector<std::uint32_t> labels;
  labels.reserve(spec.num_users() + spec.num_items());
  for (std::size_t u = 0; u < spec.num_users(); ++u) labels.push_back(static_cast<std::uint32_t>(u / spec.users_per_comm));
  for (std::size_t i = 0; i < spec.num_items(); ++i) labels.push_back(static_cast<std::uint32_t>(i / spec.items_per_comm));
  return PlantedData{
      InteractionDataset(spec.num_users(), spec.num_items(), std::move(pairs), Role::kFull),
      Partition(labels)};
}

PlantedRemoval plant_false_negatives(const InteractionDataset& train, double fraction,
                                     std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("removal fraction must be in (0, 1)");
  const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(train.size()) + 1e-9));
  if (count == 0) throw ConfigError("removal fraction removes no interactions");

  std::vector<Interaction> pairs = train.interactions();
  Rng rng(seed);
  // Partial Fisher-Yates: the first `count` slots are the removed sample.
  for (std::size_t k = 0; k < count; ++k) {
    const auto j = k + static_cast<std::size_t>(rng.uniform_index(pairs.size() - k));
    std::swap(pairs[k], pairs[j]);
  }
  std::vector<Interaction> removed(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(count));
  std::vector<Interaction> kept(pairs.begin() + static_cast<std::ptrdiff_t>(count), pairs.end());
  std::sort(removed.begin(), removed.end());
  return PlantedRemoval{
      InteractionDataset(train.num_users(), train.num_items(), std::move(kept), train.role()),
      std::move(removed), fraction};
}

namespace {

double directed_match(const Partition& a, const Partition& b) {
  std::map<std::pair<CommunityId, CommunityId>, std::size_t> overlap;
  for (NodeId v = 0; v < a.num_nodes(); ++v) ++overlap[{a.label(v), b.label(v)}];
  std::vector<std::size_t> best(a.num_communities(), 0);
  for (const auto& [key, count] : overlap) best[key.first] = std::max(best[key.first], count);
  std::size_t total = 0;
  for (auto c : best) total += c;
  return static_cast<double>(total) / static_cast<double>(a.num_nodes());
}

}  // namespace

double best_match_accuracy(const Partition& found, const Partition& truth) {
  if (found.num_nodes() != truth.num_nodes()) throw ContractError("partitions differ in size");
  if (found.num_nodes() == 0) return 1.0;
  return std::min(directed_match(found, truth), directed_match(truth, found));
}

}  // namespace tpscfo
