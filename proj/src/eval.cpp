#include "tpscfo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "tpscfo/error.hpp"

namespace tpscfo {

std::vector<Index> rank_items(const MFModel& model, Index u, std::span<const Index> exclude,
                              std::size_t limit) {
  std::vector<Index> items;
  items.reserve(model.num_items());
  for (Index i = 0; i < model.num_items(); ++i) {
    if (!std::binary_search(exclude.begin(), exclude.end(), i)) items.push_back(i);
  }
  const Eigen::VectorXd scores = model.item_emb * model.user_emb.row(u).transpose();
  auto before = [&](Index a, Index b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  if (limit > 0 && limit < items.size()) {
    std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(limit), items.end(),
                      before);
    items.resize(limit);
  } else {
    std::sort(items.begin(), items.end(), before);
  }
  return items;
}

double recall_at_k(std::span<const Index> ranked, std::span<const Index> test_items, std::size_t k) {
  if (test_items.empty()) throw InvalidInputError("recall of an empty test set");
  const std::size_t top = std::min(k, ranked.size());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < top; ++r) {
    hits += std::binary_search(test_items.begin(), test_items.end(), ranked[r]) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(test_items.size());
}

double ndcg_at_k(std::span<const Index> ranked, std::span<const Index> test_items, std::size_t k) {
  if (test_items.empty()) throw InvalidInputError("ndcg of an empty test set");
  const std::size_t top = std::min(k, ranked.size());
  double dcg = 0.0;
  for (std::size_t r = 0; r < top; ++r) {
    if (std::binary_search(test_items.begin(), test_items.end(), ranked[r])) {
      dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    }
  }
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, test_items.size()); ++r) {
    idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  return dcg / idcg;
}

double MetricReport::get(const std::string& name) const {
  for (const auto& [key, value] : metrics) {
    if (key == name) return value;
  }
  throw InvalidInputError("no metric named " + name);
}

std::string MetricReport::to_json() const {
  std::string out = "{\n";
  char buf[64];
  for (const auto& [key, value] : metrics) {
    std::snprintf(buf, sizeof buf, "%.6f", value);
    out += "  \"" + key + "\": " + buf + ",\n";
  }
  out += "  \"num_evaluated_users\": " + std::to_string(num_evaluated_users) + "\n}\n";
  return out;
}

std::string MetricReport::to_csv() const {
  std::string header, row;
  char buf[64];
  for (const auto& [key, value] : metrics) {
    std::snprintf(buf, sizeof buf, "%.6f", value);
    header += (header.empty() ? "" : ",") + key;
    row += (row.empty() ? "" : ",") + std::string(buf);
  }
  return header + "\n" + row + "\n";
}

MetricReport evaluate(const MFModel& model, const PositiveSampleSet& train_pos,
                      const InteractionDataset& test, std::span<const std::size_t> ks) {
  if (ks.empty()) throw ConfigError("evaluation needs at least one cutoff k");
  if (model.num_users() != train_pos.num_users() || model.num_items() != train_pos.num_items() ||
      test.num_users() != model.num_users() || test.num_items() != model.num_items()) {
    throw ContractError("model, positives, and test set index spaces differ");
  }
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());
  std::vector<double> recall_sum(ks.size(), 0.0), ndcg_sum(ks.size(), 0.0);
  MetricReport report;
  for (Index u = 0; u < test.num_users(); ++u) {
    const auto truth = test.user_items(u);
    if (truth.empty()) continue;
    const auto ranked = rank_items(model, u, train_pos.positives(u), max_k);
    for (std::size_t k = 0; k < ks.size(); ++k) {
      recall_sum[k] += recall_at_k(ranked, truth, ks[k]);
      ndcg_sum[k] += ndcg_at_k(ranked, truth, ks[k]);
    }
    ++report.num_evaluated_users;
  }
  if (report.num_evaluated_users == 0) throw EmptyEvaluationError("no user has test interactions");
  const auto n = static_cast<double>(report.num_evaluated_users);
  for (std::size_t k = 0; k < ks.size(); ++k) {
    report.metrics.emplace_back("recall@" + std::to_string(ks[k]), recall_sum[k] / n);
  }
  for (std::size_t k = 0; k < ks.size(); ++k) {
    report.metrics.emplace_back("ndcg@" + std::to_string(ks[k]), ndcg_sum[k] / n);
  }
  return report;
}

}  // namespace tpscfo
