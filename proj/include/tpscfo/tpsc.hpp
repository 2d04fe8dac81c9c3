#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tpscfo/comfni.hpp"
#include "tpscfo/community.hpp"
#include "tpscfo/dataio.hpp"

namespace tpscfo {

// One row per entity.
using EmbeddingMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TpscConfig {
  double quantile_k = 30.0;
  int als_dim = 64;
  int als_iters = 15;
  double als_reg = 0.01;
  double als_confidence = 40.0;
  std::uint64_t seed = 2022;

  void validate() const;
};

// Per-user candidate items Q_u, ascending.
using CandidateSets = std::vector<std::vector<Index>>;

// Q_u = items paired with u in both sets.
CandidateSets consensus_candidates(const FalseNegativePairSet& set_ld,
                                   const FalseNegativePairSet& set_im, std::size_t num_users);

struct AlsModel {
  EmbeddingMatrix users;
  EmbeddingMatrix items;
  // Weighted objective after every full sweep.
  std::vector<double> objective_trace;
};

// Implicit-feedback weighted ALS: preference 1 on observed cells and 0
// elsewhere, confidence 1 + als_confidence on observed cells and 1
// elsewhere, ridge penalty als_reg on both factor matrices.
AlsModel als_train(const InteractionDataset& train, const TpscConfig& cfg);

// sum_{u,i} c_ui (p_ui - x_u.y_i)^2 + reg (|X|^2 + |Y|^2), computed without
// materializing the dense matrix.
double als_objective(const InteractionDataset& train, const EmbeddingMatrix& users,
                     const EmbeddingMatrix& items, double reg, double confidence);

// Cosine similarity; 0 if either vector has zero norm.
double cosine(const Eigen::Ref<const Eigen::RowVectorXd>& a,
              const Eigen::Ref<const Eigen::RowVectorXd>& b);

// k-th percentile (k in [0, 100]) with linear interpolation between order
// statistics at positions k/100 * (n-1). Throws InvalidInputError when empty.
double percentile(std::vector<double> values, double k);

// t_u over cos(e_u, e_i) for i in S_u; nullopt when S_u is empty.
std::optional<double> personalized_threshold(Index u, std::span<const Index> positives,
                                             const AlsModel& als, double k);

// Items of Q_u with cos(e_u, e_i) strictly above t_u.
std::vector<Index> filter_false_negatives(Index u, std::span<const Index> candidates,
                                          const AlsModel& als, double threshold);

// S_u, accepted false negatives F_u, and thresholds t_u for every user.
class PositiveSampleSet {
 public:
  PositiveSampleSet() = default;
  // S_u from `train`, all F_u empty.
  explicit PositiveSampleSet(const InteractionDataset& train);

  std::size_t num_users() const { return original_.size(); }
  std::size_t num_items() const { return num_items_; }

  std::span<const Index> original(Index u) const { return original_[u]; }
  std::span<const Index> false_negatives(Index u) const { return false_negatives_[u]; }
  // F_u before leakage removal (diagnostics only).
  std::span<const Index> filtered_before_leakage(Index u) const { return filtered_[u]; }
  // S_u^+ = S_u ∪ F_u, ascending.
  std::span<const Index> positives(Index u) const { return merged_[u]; }
  std::optional<double> threshold(Index u) const { return thresholds_[u]; }

  // Sets F_u (must be disjoint from S_u) and its pre-leakage superset.
  void set_false_negatives(Index u, std::vector<Index> accepted, std::vector<Index> filtered);
  void set_threshold(Index u, std::optional<double> t) { thresholds_[u] = t; }

  std::size_t total_original() const;
  std::size_t total_false_negatives() const;
  std::size_t total_positives() const { return total_original() + total_false_negatives(); }
  std::vector<Interaction> false_negative_pairs() const;
  std::vector<Interaction> filtered_pairs() const;

  // positives.tsv: "user_index<TAB>item_index<TAB>origin" (origin orig|fn);
  // thresholds.tsv: "user_index<TAB>t_u" for users that have one.
  void write(const std::filesystem::path& positives_path,
             const std::filesystem::path& thresholds_path) const;
  static PositiveSampleSet read(const std::filesystem::path& positives_path,
                                const std::filesystem::path& thresholds_path,
                                std::size_t num_users, std::size_t num_items);

 private:
  void rebuild_merged(Index u);

  std::size_t num_items_ = 0;
  std::vector<std::vector<Index>> original_;
  std::vector<std::vector<Index>> false_negatives_;
  std::vector<std::vector<Index>> filtered_;
  std::vector<std::vector<Index>> merged_;
  std::vector<std::optional<double>> thresholds_;
};

// Thresholds, filtration, S_u^+ assembly, then removal of any F_u pair that
// appears in `val` or `test`.
PositiveSampleSet assemble_positive_set(const InteractionDataset& train,
                                        const InteractionDataset& val,
                                        const InteractionDataset& test,
                                        const CandidateSets& candidates, const AlsModel& als,
                                        double quantile_k);

struct TpscArtifacts {
  FalseNegativePairSet set_leiden;
  FalseNegativePairSet set_infomap;
  CandidateSets candidates;
  AlsModel als;
  PositiveSampleSet positives;
  std::vector<std::string> warnings;

  std::size_t num_candidates() const;
  // Consensus pairs as a set (source = consensus).
  FalseNegativePairSet candidate_pairs() const;
};

TpscArtifacts run_tpsc(const InteractionDataset& train, const InteractionDataset& val,
                       const InteractionDataset& test, const TpscConfig& cfg,
                       const Partition& leiden_partition, const Partition& infomap_partition,
                       const ComfniOptions& options = {});

PositiveSampleSet build_tpsc(const InteractionDataset& train, const InteractionDataset& val,
                             const InteractionDataset& test, const TpscConfig& cfg,
                             const Partition& leiden_partition, const Partition& infomap_partition);

// Number of F_u pairs present in `heldout`.
std::size_t count_leaked(const PositiveSampleSet& positives, const InteractionDataset& heldout);

}  // namespace tpscfo
