#include "tpscfo/recfo.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tpscfo/error.hpp"

namespace tpscfo {

MFModel MFModel::xavier(std::size_t num_users, std::size_t num_items, int dim, std::uint64_t seed) {
  Rng rng(seed);
  auto init = [&](std::size_t rows) {
    EmbeddingMatrix m(static_cast<Eigen::Index>(rows), dim);
    const double bound = std::sqrt(6.0 / (static_cast<double>(rows) + dim));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
    }
    return m;
  };
  MFModel model;
  model.user_emb = init(num_users);
  model.item_emb = init(num_items);
  return model;
}

void TrainConfig::validate() const {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(l2_lambda >= 0.0)) throw ConfigError("l2_lambda must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (dns_pool < 1) throw ConfigError("dns_pool must be >= 1");
}

std::string TrainConfig::canonical() const {
  std::ostringstream s;
  s.precision(17);
  s << "dim=" << dim << ";lr=" << lr << ";l2_lambda=" << l2_lambda << ";batch_size=" << batch_size
    << ";epochs=" << epochs << ";neighborhood_n=" << neighborhood_n
    << ";sampler=" << (sampler == SamplerKind::kRns ? "rns" : "dns") << ";dns_pool=" << dns_pool
    << ";feature_optimization=" << (feature_optimization ? 1 : 0) << ";seed=" << seed;
  return s.str();
}

double neg_log_sigmoid(double x) {
  // ln(1 + e^{-x}) = max(-x, 0) + ln(1 + e^{-|x|})
  return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double bpr_pair_loss(double score_pos, double score_neg, double l2_term) {
  return neg_log_sigmoid(score_pos - score_neg) + l2_term;
}

std::vector<Index> sample_neighborhood(std::span<const Index> positives, Index item, std::size_t n,
                                       Rng& rng) {
  auto pos = std::lower_bound(positives.begin(), positives.end(), item);
  if (pos == positives.end() || *pos != item) {
    throw ContractError("sample_neighborhood: item is not among the positives");
  }
  const auto skip = static_cast<std::size_t>(pos - positives.begin());
  const std::size_t pool = positives.size() - 1;
  auto at = [&](std::size_t k) { return positives[k < skip ? k : k + 1]; };

  std::vector<Index> out;
  if (pool <= n) {
    for (std::size_t k = 0; k < pool; ++k) out.push_back(at(k));
    return out;
  }
  // Floyd's sampling of n distinct slots out of `pool`.
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  for (std::size_t j = pool - n; j < pool; ++j) {
    const auto t = static_cast<std::size_t>(rng.uniform_index(j + 1));
    const bool taken = std::find(chosen.begin(), chosen.end(), t) != chosen.end();
    chosen.push_back(taken ? j : t);
  }
  std::sort(chosen.begin(), chosen.end());
  for (auto k : chosen) out.push_back(at(k));
  return out;
}

Eigen::RowVectorXd feature_optimize(const Eigen::Ref<const Eigen::RowVectorXd>& e_i,
                                    const EmbeddingMatrix& neighbor_embs, double alpha) {
  if (neighbor_embs.rows() == 0) return e_i;
  if (neighbor_embs.cols() != e_i.cols()) {
    throw ContractError("feature_optimize: neighbor dimension differs from item dimension");
  }
  return alpha * neighbor_embs.colwise().mean() + (1.0 - alpha) * e_i;
}

Index sample_negative_rns(std::span<const Index> positives, std::size_t num_items, Rng& rng) {
  if (positives.size() >= num_items) {
    throw UnsampleableError("user is positive on every item; no negative to sample");
  }
  for (;;) {
    const auto j = static_cast<Index>(rng.uniform_index(num_items));
    if (!std::binary_search(positives.begin(), positives.end(), j)) return j;
  }
}

Index sample_negative_dns(Index u, const MFModel& model, std::span<const Index> positives,
                          std::size_t pool, Rng& rng) {
  if (pool < 1) throw ConfigError("dns pool must be >= 1");
  Index best = sample_negative_rns(positives, model.num_items(), rng);
  double best_score = model.score(u, best);
  for (std::size_t k = 1; k < pool; ++k) {
    const Index j = sample_negative_rns(positives, model.num_items(), rng);
    const double s = model.score(u, j);
    if (s > best_score) {
      best = j;
      best_score = s;
    }
  }
  return best;
}

namespace {

class RnsSampler final : public NegativeSampler {
 public:
  explicit RnsSampler(std::size_t num_items) : num_items_(num_items) {}
  Index sample(Index, std::span<const Index> positives, const MFModel&, Rng& rng) const override {
    return sample_negative_rns(positives, num_items_, rng);
  }

 private:
  std::size_t num_items_;
};

class DnsSampler final : public NegativeSampler {
 public:
  explicit DnsSampler(std::size_t pool) : pool_(pool) {}
  Index sample(Index u, std::span<const Index> positives, const MFModel& model,
               Rng& rng) const override {
    return sample_negative_dns(u, model, positives, pool_, rng);
  }

 private:
  std::size_t pool_;
};

EmbeddingMatrix gather(const EmbeddingMatrix& table, std::span<const Index> rows) {
  EmbeddingMatrix out(static_cast<Eigen::Index>(rows.size()), table.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = table.row(rows[k]);
  return out;
}

struct Adam {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  EmbeddingMatrix m, v;
  long step = 0;

  explicit Adam(const EmbeddingMatrix& like)
      : m(EmbeddingMatrix::Zero(like.rows(), like.cols())),
        v(EmbeddingMatrix::Zero(like.rows(), like.cols())) {}

  void update(EmbeddingMatrix& param, const EmbeddingMatrix& grad, double lr) {
    ++step;
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  }
};

}  // namespace

std::unique_ptr<NegativeSampler> make_sampler(SamplerKind kind, std::size_t num_items,
                                              std::size_t dns_pool) {
  if (kind == SamplerKind::kDns) return std::make_unique<DnsSampler>(dns_pool);
  return std::make_unique<RnsSampler>(num_items);
}

PairGradient pair_loss_grad(const Eigen::Ref<const Eigen::RowVectorXd>& e_u,
                            const Eigen::Ref<const Eigen::RowVectorXd>& e_i,
                            const EmbeddingMatrix& neighbors, double alpha,
                            const Eigen::Ref<const Eigen::RowVectorXd>& e_j, double l2_lambda) {
  const auto e_pos = feature_optimize(e_i, neighbors, alpha);
  const double x = e_u.dot(e_pos) - e_u.dot(e_j);
  PairGradient g;
  g.bpr = neg_log_sigmoid(x);
  g.loss = g.bpr + l2_lambda * (e_u.squaredNorm() + e_i.squaredNorm() + e_j.squaredNorm());

  // d(-ln sigma(x))/dx = -sigma(-x)
  const double dx = -1.0 / (1.0 + std::exp(x));
  const Eigen::RowVectorXd d_pos = dx * e_u;
  g.d_user = dx * (e_pos - e_j) + 2.0 * l2_lambda * e_u;
  g.d_negative = -dx * e_u + 2.0 * l2_lambda * e_j;
  if (neighbors.rows() == 0) {
    g.d_item = d_pos + 2.0 * l2_lambda * e_i;
    g.d_neighbors.resize(0, e_i.cols());
  } else {
    g.d_item = (1.0 - alpha) * d_pos + 2.0 * l2_lambda * e_i;
    const Eigen::RowVectorXd share = (alpha / static_cast<double>(neighbors.rows())) * d_pos;
    g.d_neighbors = share.replicate(neighbors.rows(), 1);
  }
  return g;
}

MFModel train(const PositiveSampleSet& positives, const TrainConfig& cfg, TrainReport* report) {
  cfg.validate();
  if (positives.total_positives() == 0) throw EmptyDatasetError("no positive pairs to train on");
  MFModel model = MFModel::xavier(positives.num_users(), positives.num_items(), cfg.dim,
                                  substream_seed(cfg.seed, "init"));
  if (report) *report = TrainReport{};
  if (cfg.epochs == 0) return model;

  std::vector<Interaction> pairs;
  pairs.reserve(positives.total_positives());
  for (Index u = 0; u < positives.num_users(); ++u) {
    for (Index i : positives.positives(u)) pairs.push_back({u, i});
  }

  Rng rng(substream_seed(cfg.seed, "train"));
  auto sampler = make_sampler(cfg.sampler, positives.num_items(), cfg.dns_pool);
  Adam adam_users(model.user_emb);
  Adam adam_items(model.item_emb);
  EmbeddingMatrix grad_users = EmbeddingMatrix::Zero(model.user_emb.rows(), cfg.dim);
  EmbeddingMatrix grad_items = EmbeddingMatrix::Zero(model.item_emb.rows(), cfg.dim);
  std::vector<Index> order(pairs.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Index{0});
    rng.shuffle(order);
    double epoch_bpr = 0.0, epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      grad_users.setZero();
      grad_items.setZero();
      double batch_loss = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const auto [u, i] = pairs[order[k]];
        const auto pos = positives.positives(u);
        std::vector<Index> neighbors;
        double alpha = 0.0;
        if (cfg.feature_optimization) {
          neighbors = sample_neighborhood(pos, i, cfg.neighborhood_n, rng);
          alpha = rng.uniform01();
        }
        const Index j = sampler->sample(u, pos, model, rng);
        const auto g = pair_loss_grad(model.user_emb.row(u), model.item_emb.row(i),
                                      gather(model.item_emb, neighbors), alpha,
                                      model.item_emb.row(j), cfg.l2_lambda);
        grad_users.row(u) += scale * g.d_user;
        grad_items.row(i) += scale * g.d_item;
        grad_items.row(j) += scale * g.d_negative;
        for (std::size_t n = 0; n < neighbors.size(); ++n) {
          grad_items.row(neighbors[n]) += scale * g.d_neighbors.row(static_cast<Eigen::Index>(n));
        }
        batch_loss += g.loss;
        epoch_bpr += g.bpr;
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                           std::to_string(start) + " (lr=" + std::to_string(cfg.lr) + ")");
      }
      epoch_loss += batch_loss;
      adam_users.update(model.user_emb, grad_users, cfg.lr);
      adam_items.update(model.item_emb, grad_items, cfg.lr);
    }
    if (report) {
      report->epoch_bpr_loss.push_back(epoch_bpr / static_cast<double>(pairs.size()));
      report->epoch_loss.push_back(epoch_loss / static_cast<double>(pairs.size()));
    }
  }
  return model;
}

double mean_bpr_loss(const MFModel& model, const PositiveSampleSet& positives, std::uint64_t seed) {
  Rng rng(seed);
  double total = 0.0;
  std::size_t count = 0;
  for (Index u = 0; u < positives.num_users(); ++u) {
    const auto pos = positives.positives(u);
    for (Index i : pos) {
      const Index j = sample_negative_rns(pos, positives.num_items(), rng);
      total += bpr_pair_loss(model.score(u, i), model.score(u, j), 0.0);
      ++count;
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'P', 'S', 'C', 'F', 'O', 'M', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t k = 0; k < sizeof(T); ++k) {
    bytes[k] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * k)) & 0xffu);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw InvalidInputError("checkpoint truncated");
  }
  std::uint64_t v = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  return static_cast<T>(v);
}

void put_table(std::ostream& out, const EmbeddingMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(m(r, c))));
    }
  }
}

EmbeddingMatrix get_table(std::istream& in, std::uint64_t rows, std::uint32_t dim) {
  EmbeddingMatrix m(static_cast<Eigen::Index>(rows), dim);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = std::bit_cast<float>(get_le<std::uint32_t>(in));
    }
  }
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const MFModel& model, std::uint64_t seed,
                     std::uint64_t config_hash) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.dim()));
  put_le<std::uint64_t>(out, model.num_users());
  put_le<std::uint64_t>(out, model.num_items());
  put_le<std::uint64_t>(out, seed);
  put_le<std::uint64_t>(out, config_hash);
  put_table(out, model.user_emb);
  put_table(out, model.item_emb);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw InvalidInputError(path.string() + " is not a model checkpoint");
  }
  if (get_le<std::uint32_t>(in) != kVersion) throw InvalidInputError("unsupported checkpoint version");
  const auto dim = get_le<std::uint32_t>(in);
  const auto users = get_le<std::uint64_t>(in);
  const auto items = get_le<std::uint64_t>(in);
  Checkpoint ck;
  ck.seed = get_le<std::uint64_t>(in);
  ck.config_hash = get_le<std::uint64_t>(in);
  ck.model.user_emb = get_table(in, users, dim);
  ck.model.item_emb = get_table(in, items, dim);
  return ck;
}

}  // namespace tpscfo
