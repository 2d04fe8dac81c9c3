#include "tpscfo/tpsc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "tpscfo/error.hpp"
#include "tpscfo/rng.hpp"

namespace tpscfo {

void TpscConfig::validate() const {
  if (!(quantile_k >= 0.0 && quantile_k <= 100.0)) throw ConfigError("quantile_k must be in [0, 100]");
  if (als_dim < 1) throw ConfigError("als_dim must be >= 1");
  if (als_iters < 0) throw ConfigError("als_iters must be >= 0");
  if (!(als_reg > 0.0)) throw ConfigError("als_reg must be positive");
  if (!(als_confidence > 0.0)) throw ConfigError("als_confidence must be positive");
}

CandidateSets consensus_candidates(const FalseNegativePairSet& set_ld,
                                   const FalseNegativePairSet& set_im, std::size_t num_users) {
  CandidateSets q(num_users);
  std::vector<Interaction> both;
  std::set_intersection(set_ld.pairs().begin(), set_ld.pairs().end(), set_im.pairs().begin(),
                        set_im.pairs().end(), std::back_inserter(both));
  for (const auto& [u, i] : both) {
    if (u >= num_users) throw ContractError("candidate pair user out of range");
    q[u].push_back(i);
  }
  return q;
}

namespace {

// Column-major view of R: users of each item.
struct ItemIndex {
  std::vector<std::size_t> offsets;
  std::vector<Index> users;
};

ItemIndex transpose(const InteractionDataset& ds) {
  ItemIndex t;
  t.offsets.assign(ds.num_items() + 1, 0);
  for (const auto& p : ds.interactions()) ++t.offsets[p.item + 1];
  for (std::size_t i = 0; i < ds.num_items(); ++i) t.offsets[i + 1] += t.offsets[i];
  t.users.resize(ds.size());
  auto cursor = t.offsets;
  for (const auto& p : ds.interactions()) t.users[cursor[p.item]++] = p.user;
  return t;
}

// Solves every row of `solve` against the frozen `fixed` factors:
// (F^T F + F^T (C_r - I) F + reg I) x_r = F^T C_r p_r.
template <typename Observed>
void als_half_sweep(EmbeddingMatrix& solve, const EmbeddingMatrix& fixed, double reg,
                    double confidence, Observed observed) {
  const Eigen::Index d = fixed.cols();
  const Eigen::MatrixXd gram = fixed.transpose() * fixed;
  Eigen::MatrixXd a(d, d);
  Eigen::VectorXd b(d);
  for (Eigen::Index r = 0; r < solve.rows(); ++r) {
    a = gram;
    a.diagonal().array() += reg;
    b.setZero();
    for (Index other : observed(static_cast<Index>(r))) {
      const auto y = fixed.row(other).transpose();
      a.noalias() += confidence * (y * y.transpose());
      b.noalias() += (1.0 + confidence) * y;
    }
    solve.row(r) = a.ldlt().solve(b).transpose();
  }
}

}  // namespace

double als_objective(const InteractionDataset& train, const EmbeddingMatrix& users,
                     const EmbeddingMatrix& items, double reg, double confidence) {
  // Every cell as if unobserved, then correct the observed ones.
  const Eigen::MatrixXd uu = users.transpose() * users;
  const Eigen::MatrixXd ii = items.transpose() * items;
  double total = (uu.array() * ii.array()).sum();
  for (const auto& [u, i] : train.interactions()) {
    const double s = users.row(u).dot(items.row(i));
    total += (1.0 + confidence) * (1.0 - s) * (1.0 - s) - s * s;
  }
  return total + reg * (users.squaredNorm() + items.squaredNorm());
}

AlsModel als_train(const InteractionDataset& train, const TpscConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw EmptyDatasetError("ALS needs a non-empty training set");
  const Eigen::Index d = cfg.als_dim;
  AlsModel model;
  model.users.resize(static_cast<Eigen::Index>(train.num_users()), d);
  model.items.resize(static_cast<Eigen::Index>(train.num_items()), d);
  Rng rng(cfg.seed);
  const double scale = 0.01 / std::sqrt(static_cast<double>(d));
  for (auto* m : {&model.users, &model.items}) {
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < d; ++c) (*m)(r, c) = rng.uniform(-scale, scale);
    }
  }

  const ItemIndex by_item = transpose(train);
  for (int it = 0; it < cfg.als_iters; ++it) {
    als_half_sweep(model.users, model.items, cfg.als_reg, cfg.als_confidence,
                   [&](Index u) { return train.user_items(u); });
    als_half_sweep(model.items, model.users, cfg.als_reg, cfg.als_confidence, [&](Index i) {
      return std::span<const Index>(by_item.users.data() + by_item.offsets[i],
                                    by_item.offsets[i + 1] - by_item.offsets[i]);
    });
    model.objective_trace.push_back(
        als_objective(train, model.users, model.items, cfg.als_reg, cfg.als_confidence));
  }
  return model;
}

double cosine(const Eigen::Ref<const Eigen::RowVectorXd>& a,
              const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

double percentile(std::vector<double> values, double k) {
  if (values.empty()) throw InvalidInputError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = k / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::optional<double> personalized_threshold(Index u, std::span<const Index> positives,
                                             const AlsModel& als, double k) {
  if (positives.empty()) return std::nullopt;
  std::vector<double> sims;
  sims.reserve(positives.size());
  for (Index i : positives) sims.push_back(cosine(als.users.row(u), als.items.row(i)));
  return percentile(std::move(sims), k);
}

std::vector<Index> filter_false_negatives(Index u, std::span<const Index> candidates,
                                          const AlsModel& als, double threshold) {
  std::vector<Index> kept;
  for (Index i : candidates) {
    if (cosine(als.users.row(u), als.items.row(i)) > threshold) kept.push_back(i);
  }
  return kept;
}

PositiveSampleSet::PositiveSampleSet(const InteractionDataset& train)
    : num_items_(train.num_items()),
      original_(train.num_users()),
      false_negatives_(train.num_users()),
      filtered_(train.num_users()),
      merged_(train.num_users()),
      thresholds_(train.num_users()) {
  for (Index u = 0; u < train.num_users(); ++u) {
    auto items = train.user_items(u);
    original_[u].assign(items.begin(), items.end());
    merged_[u] = original_[u];
  }
}

void PositiveSampleSet::set_false_negatives(Index u, std::vector<Index> accepted,
                                            std::vector<Index> filtered) {
  std::sort(accepted.begin(), accepted.end());
  std::sort(filtered.begin(), filtered.end());
  for (Index i : accepted) {
    if (i >= num_items_) throw ContractError("false negative item out of range");
    if (std::binary_search(original_[u].begin(), original_[u].end(), i)) {
      throw ContractError("false negative overlaps the user's observed positives");
    }
  }
  false_negatives_[u] = std::move(accepted);
  filtered_[u] = std::move(filtered);
  rebuild_merged(u);
}

void PositiveSampleSet::rebuild_merged(Index u) {
  merged_[u].clear();
  std::merge(original_[u].begin(), original_[u].end(), false_negatives_[u].begin(),
             false_negatives_[u].end(), std::back_inserter(merged_[u]));
}

std::size_t PositiveSampleSet::total_original() const {
  std::size_t n = 0;
  for (const auto& s : original_) n += s.size();
  return n;
}

std::size_t PositiveSampleSet::total_false_negatives() const {
  std::size_t n = 0;
  for (const auto& f : false_negatives_) n += f.size();
  return n;
}

std::vector<Interaction> PositiveSampleSet::false_negative_pairs() const {
  std::vector<Interaction> pairs;
  for (Index u = 0; u < num_users(); ++u) {
    for (Index i : false_negatives_[u]) pairs.push_back({u, i});
  }
  return pairs;
}

std::vector<Interaction> PositiveSampleSet::filtered_pairs() const {
  std::vector<Interaction> pairs;
  for (Index u = 0; u < num_users(); ++u) {
    for (Index i : filtered_[u]) pairs.push_back({u, i});
  }
  return pairs;
}

void PositiveSampleSet::write(const std::filesystem::path& positives_path,
                              const std::filesystem::path& thresholds_path) const {
  std::ofstream out(positives_path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write " + positives_path.string());
  for (Index u = 0; u < num_users(); ++u) {
    for (Index i : merged_[u]) {
      const bool fn = std::binary_search(false_negatives_[u].begin(), false_negatives_[u].end(), i);
      out << u << '\t' << i << '\t' << (fn ? "fn" : "orig") << '\n';
    }
  }
  std::ofstream th(thresholds_path, std::ios::binary | std::ios::trunc);
  if (!th) throw InvalidInputError("cannot write " + thresholds_path.string());
  char buf[64];
  for (Index u = 0; u < num_users(); ++u) {
    if (!thresholds_[u]) continue;
    std::snprintf(buf, sizeof buf, "%.17g", *thresholds_[u]);
    th << u << '\t' << buf << '\n';
  }
}

PositiveSampleSet PositiveSampleSet::read(const std::filesystem::path& positives_path,
                                          const std::filesystem::path& thresholds_path,
                                          std::size_t num_users, std::size_t num_items) {
  std::ifstream in(positives_path);
  if (!in) throw InvalidInputError("cannot open " + positives_path.string());
  std::vector<Interaction> orig;
  std::vector<std::vector<Index>> fns(num_users);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    Index u = 0, i = 0;
    try {
      if (t2 == std::string::npos) throw std::invalid_argument("fields");
      u = static_cast<Index>(std::stoul(line.substr(0, t1)));
      i = static_cast<Index>(std::stoul(line.substr(t1 + 1, t2 - t1 - 1)));
    } catch (const std::logic_error&) {
      throw ParseError(positives_path.string(), line_no, "expected \"user<TAB>item<TAB>origin\"");
    }
    const auto origin = line.substr(t2 + 1);
    if (u >= num_users || i >= num_items) {
      throw ParseError(positives_path.string(), line_no, "index out of range");
    }
    if (origin == "orig") {
      orig.push_back({u, i});
    } else if (origin == "fn") {
      fns[u].push_back(i);
    } else {
      throw ParseError(positives_path.string(), line_no, "unknown origin \"" + origin + "\"");
    }
  }
  PositiveSampleSet set(InteractionDataset(num_users, num_items, std::move(orig), Role::kFull));
  for (Index u = 0; u < num_users; ++u) {
    if (!fns[u].empty()) set.set_false_negatives(u, fns[u], fns[u]);
  }
  std::ifstream th(thresholds_path);
  if (!th) throw InvalidInputError("cannot open " + thresholds_path.string());
  line_no = 0;
  while (std::getline(th, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    try {
      if (tab == std::string::npos) throw std::invalid_argument("tab");
      const auto u = static_cast<Index>(std::stoul(line.substr(0, tab)));
      if (u >= num_users) throw std::out_of_range("user");
      set.set_threshold(u, std::stod(line.substr(tab + 1)));
    } catch (const std::logic_error&) {
      throw ParseError(thresholds_path.string(), line_no, "expected \"user_index<TAB>t_u\"");
    }
  }
  return set;
}

PositiveSampleSet assemble_positive_set(const InteractionDataset& train,
                                        const InteractionDataset& val,
                                        const InteractionDataset& test,
                                        const CandidateSets& candidates, const AlsModel& als,
                                        double quantile_k) {
  for (const auto* held : {&val, &test}) {
    if (held->num_users() != train.num_users() || held->num_items() != train.num_items()) {
      throw ContractError("validation/test index space differs from train");
    }
  }
  if (candidates.size() != train.num_users()) throw ContractError("candidate sets per user mismatch");
  PositiveSampleSet set(train);
  for (Index u = 0; u < train.num_users(); ++u) {
    const auto threshold = personalized_threshold(u, train.user_items(u), als, quantile_k);
    set.set_threshold(u, threshold);
    if (!threshold) continue;
    auto filtered = filter_false_negatives(u, candidates[u], als, *threshold);
    std::vector<Index> accepted;
    for (Index i : filtered) {
      if (!train.contains(u, i) && !val.contains(u, i) && !test.contains(u, i)) accepted.push_back(i);
    }
    set.set_false_negatives(u, std::move(accepted), std::move(filtered));
  }
  return set;
}

std::size_t TpscArtifacts::num_candidates() const {
  std::size_t n = 0;
  for (const auto& q : candidates) n += q.size();
  return n;
}

FalseNegativePairSet TpscArtifacts::candidate_pairs() const {
  std::vector<Interaction> pairs;
  for (Index u = 0; u < candidates.size(); ++u) {
    for (Index i : candidates[u]) pairs.push_back({u, i});
  }
  return FalseNegativePairSet(std::move(pairs), PairSource::kConsensus);
}

TpscArtifacts run_tpsc(const InteractionDataset& train, const InteractionDataset& val,
                       const InteractionDataset& test, const TpscConfig& cfg,
                       const Partition& leiden_partition, const Partition& infomap_partition,
                       const ComfniOptions& options) {
  cfg.validate();
  TpscArtifacts out;
  auto ld = comfni(train, leiden_partition, PairSource::kLeiden, options);
  auto im = comfni(train, infomap_partition, PairSource::kInfomap, options);
  out.set_leiden = std::move(ld.pairs);
  out.set_infomap = std::move(im.pairs);
  out.warnings = std::move(ld.warnings);
  out.warnings.insert(out.warnings.end(), im.warnings.begin(), im.warnings.end());
  out.candidates = consensus_candidates(out.set_leiden, out.set_infomap, train.num_users());
  out.als = als_train(train, cfg);
  out.positives = assemble_positive_set(train, val, test, out.candidates, out.als, cfg.quantile_k);
  return out;
}

PositiveSampleSet build_tpsc(const InteractionDataset& train, const InteractionDataset& val,
                             const InteractionDataset& test, const TpscConfig& cfg,
                             const Partition& leiden_partition, const Partition& infomap_partition) {
  return run_tpsc(train, val, test, cfg, leiden_partition, infomap_partition).positives;
}

std::size_t count_leaked(const PositiveSampleSet& positives, const InteractionDataset& heldout) {
  std::size_t leaked = 0;
  for (Index u = 0; u < positives.num_users(); ++u) {
    for (Index i : positives.false_negatives(u)) leaked += heldout.contains(u, i) ? 1 : 0;
  }
  return leaked;
}

}  // namespace tpscfo
