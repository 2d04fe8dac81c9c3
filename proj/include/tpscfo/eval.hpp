#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tpscfo/dataio.hpp"
#include "tpscfo/recfo.hpp"
#include "tpscfo/tpsc.hpp"

namespace tpscfo {

// Items outside `exclude` (ascending) by descending score, ties by ascending
// index. `limit` truncates the list (0 keeps everything).
std::vector<Index> rank_items(const MFModel& model, Index u, std::span<const Index> exclude,
                              std::size_t limit = 0);

// |top-k ∩ test| / |test|; `test_items` ascending and non-empty.
double recall_at_k(std::span<const Index> ranked, std::span<const Index> test_items, std::size_t k);
// Binary-relevance NDCG with 1-based ranks and log2(r + 1) discounts.
double ndcg_at_k(std::span<const Index> ranked, std::span<const Index> test_items, std::size_t k);

struct MetricReport {
  // Ordered as recall@k for each k, then ndcg@k for each k.
  std::vector<std::pair<std::string, double>> metrics;
  std::size_t num_evaluated_users = 0;

  double get(const std::string& name) const;
  std::string to_json() const;
  std::string to_csv() const;
};

// Full-ranking evaluation, excluding S_u^+ from each user's candidates and
// averaging over users with a non-empty test set.
MetricReport evaluate(const MFModel& model, const PositiveSampleSet& train_pos,
                      const InteractionDataset& test, std::span<const std::size_t> ks);

}  // namespace tpscfo
