#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tpscfo/dataio.hpp"
#include "tpscfo/rng.hpp"
#include "tpscfo/tpsc.hpp"

namespace tpscfo {

// Matrix-factorization recommender; r_ui = e_u . e_i.
struct MFModel {
  EmbeddingMatrix user_emb;
  EmbeddingMatrix item_emb;

  std::size_t num_users() const { return static_cast<std::size_t>(user_emb.rows()); }
  std::size_t num_items() const { return static_cast<std::size_t>(item_emb.rows()); }
  int dim() const { return static_cast<int>(user_emb.cols()); }
  double score(Index u, Index i) const { return user_emb.row(u).dot(item_emb.row(i)); }

  // Xavier-uniform tables, bound sqrt(6 / (rows + dim)) per table.
  static MFModel xavier(std::size_t num_users, std::size_t num_items, int dim, std::uint64_t seed);
};

enum class SamplerKind { kRns, kDns };

struct TrainConfig {
  int dim = 64;
  double lr = 0.001;
  double l2_lambda = 1e-4;
  std::size_t batch_size = 2048;
  int epochs = 200;
  std::size_t neighborhood_n = 10;
  SamplerKind sampler = SamplerKind::kRns;
  std::size_t dns_pool = 10;
  // Neighborhood mixup of positive embeddings; off trains plain MF-BPR.
  bool feature_optimization = true;
  std::uint64_t seed = 2022;

  void validate() const;
  // Stable "key=value;..." rendering hashed into checkpoints.
  std::string canonical() const;
};

// -ln sigma(x) evaluated without overflow for any finite x.
double neg_log_sigmoid(double x);

// -ln sigma(score_pos - score_neg) + l2_term.
double bpr_pair_loss(double score_pos, double score_neg, double l2_term);

// Up to n items drawn uniformly without replacement from positives \ {item};
// `positives` is ascending and contains `item`. Result ascending.
std::vector<Index> sample_neighborhood(std::span<const Index> positives, Index item, std::size_t n,
                                       Rng& rng);

// alpha * mean(neighbors) + (1 - alpha) * e_i; e_i when there are no
// neighbors. Throws ContractError on dimension mismatch.
Eigen::RowVectorXd feature_optimize(const Eigen::Ref<const Eigen::RowVectorXd>& e_i,
                                    const EmbeddingMatrix& neighbor_embs, double alpha);

// Uniform over items outside `positives` (ascending) by rejection.
// Throws UnsampleableError when the user is positive on every item.
Index sample_negative_rns(std::span<const Index> positives, std::size_t num_items, Rng& rng);

// Highest-scored of `pool` RNS draws; ties keep the first drawn.
Index sample_negative_dns(Index u, const MFModel& model, std::span<const Index> positives,
                          std::size_t pool, Rng& rng);

class NegativeSampler {
 public:
  virtual ~NegativeSampler() = default;
  virtual Index sample(Index u, std::span<const Index> positives, const MFModel& model,
                       Rng& rng) const = 0;
};

std::unique_ptr<NegativeSampler> make_sampler(SamplerKind kind, std::size_t num_items,
                                              std::size_t dns_pool);

// Loss of one (u, i, N_i, j) example and its gradient w.r.t. every embedding
// it touches:
//   -ln sigma(e_u.e_i+ - e_u.e_j) + l2 (|e_u|^2 + |e_i|^2 + |e_j|^2)
// with e_i+ = feature_optimize(e_i, neighbors, alpha).
struct PairGradient {
  double bpr = 0.0;
  double loss = 0.0;
  Eigen::RowVectorXd d_user;
  Eigen::RowVectorXd d_item;
  Eigen::RowVectorXd d_negative;
  EmbeddingMatrix d_neighbors;
};

PairGradient pair_loss_grad(const Eigen::Ref<const Eigen::RowVectorXd>& e_u,
                            const Eigen::Ref<const Eigen::RowVectorXd>& e_i,
                            const EmbeddingMatrix& neighbors, double alpha,
                            const Eigen::Ref<const Eigen::RowVectorXd>& e_j, double l2_lambda);

struct TrainReport {
  std::vector<double> epoch_bpr_loss;
  std::vector<double> epoch_loss;
};

// MF-BPR over S_U^+ with neighborhood feature optimization and Adam, one
// optimizer step per mini-batch.
MFModel train(const PositiveSampleSet& positives, const TrainConfig& cfg,
              TrainReport* report = nullptr);

// Mean BPR loss over every positive pair with negatives drawn from `seed`
// (no feature optimization). Used to compare models on equal footing.
double mean_bpr_loss(const MFModel& model, const PositiveSampleSet& positives, std::uint64_t seed);

struct Checkpoint {
  MFModel model;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

// Header (magic, version, dim, users, items, seed, config hash) followed by
// the user then item tables as row-major little-endian float32.
void save_checkpoint(const std::filesystem::path& path, const MFModel& model, std::uint64_t seed,
                     std::uint64_t config_hash);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tpscfo
