#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "support.hpp"
#include "tpscfo/error.hpp"
#include "tpscfo/recfo.hpp"

using namespace tpscfo;

namespace {

Eigen::RowVectorXd random_row(int dim, Rng& rng, double scale = 1.0) {
  Eigen::RowVectorXd v(dim);
  for (int c = 0; c < dim; ++c) v(c) = scale * rng.uniform(-1.0, 1.0);
  return v;
}

EmbeddingMatrix random_rows(int rows, int dim, Rng& rng) {
  EmbeddingMatrix m(rows, dim);
  for (int r = 0; r < rows; ++r) m.row(r) = random_row(dim, rng);
  return m;
}

PositiveSampleSet toy_positives() {
  // 20 interactions over 5 users and 12 items
  std::vector<Interaction> pairs;
  for (Index u = 0; u < 5; ++u) {
    for (Index k = 0; k < 4; ++k) pairs.push_back({u, (u * 2 + k) % 12});
  }
  return PositiveSampleSet(InteractionDataset(5, 12, pairs, Role::kTrain));
}

double relative_error(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  const double denom = std::max(a.norm() + b.norm(), 1e-10);
  return (a - b).norm() / denom;
}

}  // namespace

TEST_CASE("bpr pair loss values") {
  CHECK(bpr_pair_loss(0.3, 0.3, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bpr_pair_loss(2.0, 0.0, 0.0) == doctest::Approx(0.126928).epsilon(1e-6));
  CHECK(bpr_pair_loss(0.0, 50.0, 0.0) == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(bpr_pair_loss(1.0, 1.0, 0.5) == doctest::Approx(std::log(2.0) + 0.5));
}

TEST_CASE("negative log sigmoid is accurate across a wide range") {
  for (int k = -5000; k <= 5000; ++k) {
    const double x = k * 0.1;
    const long double lx = x;
    const long double exact =
        lx >= 0 ? std::log1p(std::exp(-lx)) : -lx + std::log1p(std::exp(lx));
    const double got = neg_log_sigmoid(x);
    REQUIRE(std::isfinite(got));
    CHECK(std::abs(got - static_cast<double>(exact)) <= 1e-12 * std::abs(static_cast<double>(exact)) + 1e-300);
  }
}

TEST_CASE("neighborhood sampling clamps and excludes the anchor") {
  Rng rng(1);
  std::vector<Index> one{4};
  CHECK(sample_neighborhood(one, 4, 10, rng).empty());
  std::vector<Index> five{1, 3, 5, 7, 9};
  auto n = sample_neighborhood(five, 5, 10, rng);
  CHECK(n == std::vector<Index>{1, 3, 7, 9});
  for (int k = 0; k < 200; ++k) {
    auto s = sample_neighborhood(five, 3, 2, rng);
    CHECK(s.size() == 2);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(s[0] != s[1]);
    CHECK(std::find(s.begin(), s.end(), 3) == s.end());
  }
  CHECK_THROWS_AS(sample_neighborhood(five, 4, 2, rng), ContractError);
  Rng a(9), b(9);
  CHECK(sample_neighborhood(five, 1, 3, a) == sample_neighborhood(five, 1, 3, b));
}

TEST_CASE("neighborhood sampling is uniform over subsets") {
  Rng rng(2);
  std::vector<Index> pos{0, 1, 2, 3, 4};
  std::map<std::vector<Index>, int> counts;
  const int draws = 60000;
  for (int k = 0; k < draws; ++k) ++counts[sample_neighborhood(pos, 0, 2, rng)];
  CHECK(counts.size() == 6);
  double chi2 = 0.0;
  const double expected = draws / 6.0;
  for (const auto& [subset, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 15.09);  // df = 5, p = 0.01
}

TEST_CASE("feature optimization mixes toward the neighbor mean") {
  Eigen::RowVectorXd e(2);
  e << 1.0, 0.0;
  EmbeddingMatrix nb(2, 2);
  nb << 0.0, 1.0, 0.0, 3.0;
  auto mixed = feature_optimize(e, nb, 0.5);
  CHECK(mixed(0) == doctest::Approx(0.5));
  CHECK(mixed(1) == doctest::Approx(1.0));
  CHECK(feature_optimize(e, nb, 0.0) == e);
  CHECK(feature_optimize(e, EmbeddingMatrix(0, 2), 0.7) == e);
  EmbeddingMatrix same(3, 2);
  same << 1.0, 0.0, 1.0, 0.0, 1.0, 0.0;
  CHECK(feature_optimize(e, same, 0.37).isApprox(e));
  CHECK_THROWS_AS(feature_optimize(e, EmbeddingMatrix(1, 3), 0.5), ContractError);
}

TEST_CASE("mixup preserves the mean of noisy embeddings") {
  Rng rng(8);
  const int dim = 4, n = 10, draws = 100000;
  Eigen::RowVectorXd truth(dim);
  truth << 0.5, -1.0, 2.0, 0.0;
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(dim), sq = Eigen::RowVectorXd::Zero(dim);
  EmbeddingMatrix nb(n, dim);
  Eigen::RowVectorXd e(dim);
  for (int d = 0; d < draws; ++d) {
    for (int c = 0; c < dim; ++c) e(c) = truth(c) + rng.normal();
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < dim; ++c) nb(r, c) = truth(c) + rng.normal();
    }
    auto out = feature_optimize(e, nb, rng.uniform01());
    sum += out;
    sq += out.cwiseProduct(out);
  }
  for (int c = 0; c < dim; ++c) {
    const double mean = sum(c) / draws;
    const double var = sq(c) / draws - mean * mean;
    CHECK(std::abs(mean - truth(c)) < 3.0 * std::sqrt(var / draws));
  }
}

TEST_CASE("mixup shrinks noise variance by alpha^2/n + (1-alpha)^2") {
  Rng rng(9);
  const int dim = 4, draws = 100000;
  for (auto [alpha, n] : {std::pair{0.5, 10}, std::pair{0.8, 3}}) {
    const double expected = alpha * alpha / n + (1 - alpha) * (1 - alpha);
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(dim), sq = Eigen::RowVectorXd::Zero(dim);
    EmbeddingMatrix nb(n, dim);
    Eigen::RowVectorXd e(dim);
    for (int d = 0; d < draws; ++d) {
      for (int c = 0; c < dim; ++c) e(c) = rng.normal();
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < dim; ++c) nb(r, c) = rng.normal();
      }
      auto out = feature_optimize(e, nb, alpha);
      sum += out;
      sq += out.cwiseProduct(out);
    }
    for (int c = 0; c < dim; ++c) {
      const double mean = sum(c) / draws;
      const double var = sq(c) / draws - mean * mean;
      CHECK(std::abs(var / expected - 1.0) < 0.02);
    }
  }
}

TEST_CASE("rns draws outside the positives, uniformly") {
  Rng rng(3);
  std::vector<Index> pos{0};
  for (int k = 0; k < 100; ++k) CHECK(sample_negative_rns(pos, 2, rng) == 1);
  std::vector<Index> some{2, 5, 6};
  for (int k = 0; k < 10000; ++k) {
    const Index j = sample_negative_rns(some, 10, rng);
    CHECK(j < 10);
    CHECK(std::find(some.begin(), some.end(), j) == some.end());
  }
  std::vector<Index> none;
  std::vector<int> counts(10, 0);
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) ++counts[sample_negative_rns(none, 10, rng)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - draws / 10.0) * (c - draws / 10.0) / (draws / 10.0);
  CHECK(chi2 < 21.67);  // df = 9, p = 0.01
  std::vector<Index> all{0, 1};
  CHECK_THROWS_AS(sample_negative_rns(all, 2, rng), UnsampleableError);
}

TEST_CASE("dns takes the highest-scored pool candidate") {
  Rng rng(4);
  MFModel m;
  m.user_emb = EmbeddingMatrix::Ones(1, 1);
  m.item_emb = EmbeddingMatrix(3, 1);
  m.item_emb << 5.0, 0.9, 0.1;
  std::vector<Index> pos{0};
  for (int k = 0; k < 50; ++k) CHECK(sample_negative_dns(0, m, pos, 60, rng) == 1);

  Rng a(10), b(10);
  for (int k = 0; k < 100; ++k) CHECK(sample_negative_dns(0, m, pos, 1, a) == sample_negative_rns(pos, 3, b));
}

TEST_CASE("dns choice is the pool argmax and ignores positive rescaling") {
  Rng init(5);
  MFModel m = MFModel::xavier(3, 40, 8, 11);
  MFModel scaled = m;
  scaled.user_emb *= 3.7;
  scaled.item_emb *= 0.4;
  std::vector<Index> pos{1, 4, 9};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng r1(seed), r2(seed), r3(seed);
    const Index j = sample_negative_dns(2, m, pos, 10, r1);
    CHECK(sample_negative_dns(2, scaled, pos, 10, r2) == j);
    for (int k = 0; k < 10; ++k) CHECK(m.score(2, j) >= m.score(2, sample_negative_rns(pos, 40, r3)));
  }
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(6);
  const double h = 1e-6;
  int checked = 0;
  for (int point = 0; point < 100; ++point) {
    const int dim = 2 + static_cast<int>(rng.uniform_index(7));
    const int n = static_cast<int>(rng.uniform_index(5));
    Eigen::RowVectorXd eu = random_row(dim, rng), ei = random_row(dim, rng), ej = random_row(dim, rng);
    EmbeddingMatrix nb = random_rows(n, dim, rng);
    const double alpha = rng.uniform01();
    const double l2 = rng.uniform(0.0, 0.1);
    auto g = pair_loss_grad(eu, ei, nb, alpha, ej, l2);
    auto loss = [&](const Eigen::RowVectorXd& u, const Eigen::RowVectorXd& i, const EmbeddingMatrix& b,
                    const Eigen::RowVectorXd& j) { return pair_loss_grad(u, i, b, alpha, j, l2).loss; };
    auto numeric = [&](Eigen::RowVectorXd& target) {
      Eigen::RowVectorXd d(target.size());
      for (Eigen::Index c = 0; c < target.size(); ++c) {
        const double keep = target(c);
        target(c) = keep + h;
        const double up = loss(eu, ei, nb, ej);
        target(c) = keep - h;
        const double down = loss(eu, ei, nb, ej);
        target(c) = keep;
        d(c) = (up - down) / (2 * h);
      }
      return d;
    };
    CHECK(relative_error(g.d_user, numeric(eu)) < 1e-4);
    CHECK(relative_error(g.d_item, numeric(ei)) < 1e-4);
    CHECK(relative_error(g.d_negative, numeric(ej)) < 1e-4);
    REQUIRE(g.d_neighbors.rows() == n);
    for (int r = 0; r < n; ++r) {
      Eigen::RowVectorXd row = nb.row(r);
      Eigen::RowVectorXd d(dim);
      for (int c = 0; c < dim; ++c) {
        const double keep = nb(r, c);
        nb(r, c) = keep + h;
        const double up = loss(eu, ei, nb, ej);
        nb(r, c) = keep - h;
        const double down = loss(eu, ei, nb, ej);
        nb(r, c) = keep;
        d(c) = (up - down) / (2 * h);
      }
      CHECK(relative_error(g.d_neighbors.row(r), d) < 1e-4);
    }
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("train config validation and canonical form") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.canonical() == TrainConfig{}.canonical());
  TrainConfig other;
  other.lr = 0.002;
  CHECK(other.canonical() != cfg.canonical());
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("zero epochs returns the seeded initialization") {
  auto pos = toy_positives();
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.dim = 8;
  auto m = train(pos, cfg);
  auto init = MFModel::xavier(5, 12, 8, substream_seed(cfg.seed, "init"));
  CHECK(m.user_emb == init.user_emb);
  CHECK(m.item_emb == init.item_emb);
}

TEST_CASE("one epoch lowers the loss below the untrained level") {
  auto pos = toy_positives();
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 0;
  const double before = mean_bpr_loss(train(pos, cfg), pos, 99);
  cfg.epochs = 1;
  cfg.lr = 0.05;
  cfg.batch_size = 2;
  TrainReport report;
  auto m = train(pos, cfg, &report);
  REQUIRE(report.epoch_bpr_loss.size() == 1);
  const double after = mean_bpr_loss(m, pos, 99);
  MESSAGE("untrained " << before << ", after one epoch " << after);
  CHECK(after < std::log(2.0));
  CHECK(after < before);
}

TEST_CASE("training is deterministic and supports both samplers") {
  auto pos = toy_positives();
  for (auto kind : {SamplerKind::kRns, SamplerKind::kDns}) {
    TrainConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 5;
    cfg.sampler = kind;
    auto a = train(pos, cfg), b = train(pos, cfg);
    CHECK(a.user_emb == b.user_emb);
    CHECK(a.item_emb == b.item_emb);
  }
}

TEST_CASE("longer training keeps reducing the loss") {
  auto pos = toy_positives();
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 60;
  cfg.lr = 0.01;
  TrainReport report;
  train(pos, cfg, &report);
  CHECK(report.epoch_loss.back() < report.epoch_loss.front());
}

TEST_CASE("diverging training aborts") {
  auto pos = toy_positives();
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 5;
  cfg.lr = 1e200;
  CHECK_THROWS_AS(train(pos, cfg), NumericError);
}

TEST_CASE("empty positive set cannot be trained") {
  InteractionDataset none(3, 3, {}, Role::kTest);
  PositiveSampleSet pos(none);
  CHECK_THROWS_AS(train(pos, TrainConfig{}), EmptyDatasetError);
}

TEST_CASE("checkpoints round-trip at float precision") {
  auto dir = testing::scratch_dir("recfo_ckpt");
  auto m = MFModel::xavier(7, 9, 5, 3);
  save_checkpoint(dir / "m.bin", m, 42, 0xabcdefULL);
  auto cp = load_checkpoint(dir / "m.bin");
  CHECK(cp.seed == 42);
  CHECK(cp.config_hash == 0xabcdefULL);
  CHECK(cp.model.dim() == 5);
  CHECK(cp.model.user_emb.cast<float>() == m.user_emb.cast<float>());
  CHECK(cp.model.item_emb.cast<float>() == m.item_emb.cast<float>());
  testing::write_file(dir / "junk.bin", "not a model");
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.bin"), InvalidInputError);
}
