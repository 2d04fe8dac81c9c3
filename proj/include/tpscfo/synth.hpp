#pragma once

#include <cstdint>
#include <vector>

#include "tpscfo/community.hpp"
#include "tpscfo/dataio.hpp"

namespace tpscfo {

// Planted-partition bipartite block model. Users and items are numbered
// community-major: user u belongs to community u / users_per_comm.
struct PlantedSpec {
  std::size_t num_communities = 20;
  std::size_t users_per_comm = 40;
  std::size_t items_per_comm = 40;
  double p_in = 0.2;
  double p_out = 0.002;
  std::uint64_t seed = 2022;

  void validate() const;
  std::size_t num_users() const { return num_communities * users_per_comm; }
  std::size_t num_items() const { return num_communities * items_per_comm; }
};

struct PlantedData {
  InteractionDataset data;  // role full
  Partition truth;          // over the bipartite node set
};

PlantedData generate_planted(const PlantedSpec& spec);

struct PlantedRemoval {
  InteractionDataset reduced_train;
  std::vector<Interaction> removed;  // ascending
  double fraction = 0.0;
};

// Removes floor(fraction * |train|) uniformly chosen pairs. Throws
// ConfigError if fraction is outside (0, 1) or yields no removal.
PlantedRemoval plant_false_negatives(const InteractionDataset& train, double fraction,
                                     std::uint64_t seed);

// Fraction of nodes whose community maps to their planted community under
// the best one-to-one-ish matching; the minimum over both directions so that
// neither merging nor splitting communities scores well.
double best_match_accuracy(const Partition& found, const Partition& truth);

}  // namespace tpscfo
