#include <doctest.h>

#include <algorithm>

#include "support.hpp"
#include "tpscfo/comfni.hpp"
#include "tpscfo/error.hpp"

using namespace tpscfo;

namespace {

// Brute force over the full user x item product.
std::vector<Interaction> oracle_pairs(const InteractionDataset& train, const Partition& p) {
  std::vector<Interaction> out;
  const auto nu = train.num_users();
  for (Index u = 0; u < nu; ++u) {
    for (Index i = 0; i < train.num_items(); ++i) {
      if (p.label(u) == p.label(static_cast<NodeId>(nu + i)) && !train.contains(u, i)) {
        out.push_back({u, i});
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("one community yields the product minus interactions") {
  // users 0,1 and items 0,1 all in one community
  InteractionDataset train(2, 2, {{0, 0}, {0, 1}, {1, 0}}, Role::kTrain);
  auto r = comfni(train, Partition::whole(4), PairSource::kLeiden);
  CHECK(r.pairs.pairs() == std::vector<Interaction>{{1, 1}});
  CHECK(r.pairs.source() == PairSource::kLeiden);
  CHECK(r.warnings.empty());
}

TEST_CASE("user-only communities and singletons contribute nothing") {
  InteractionDataset train(2, 2, {{0, 0}, {1, 1}}, Role::kTrain);
  // users together, items each alone
  CHECK(comfni(train, Partition({0, 0, 1, 2}), PairSource::kInfomap).pairs.empty());
  CHECK(comfni(train, Partition::singletons(4), PairSource::kInfomap).pairs.empty());
}

TEST_CASE("partition size must match the bipartite graph") {
  InteractionDataset train(2, 2, {{0, 0}}, Role::kTrain);
  CHECK_THROWS_AS(comfni(train, Partition::whole(3), PairSource::kLeiden), ContractError);
}

TEST_CASE("comfni matches the brute-force product on random inputs") {
  Rng rng(17);
  for (int c = 0; c < 30; ++c) {
    const std::size_t nu = 5 + rng.uniform_index(20), ni = 5 + rng.uniform_index(20);
    std::vector<Interaction> pairs;
    for (Index u = 0; u < nu; ++u) {
      for (Index i = 0; i < ni; ++i) {
        if (rng.bernoulli(0.25)) pairs.push_back({u, i});
      }
    }
    if (pairs.empty()) pairs.push_back({0, 0});
    InteractionDataset train(nu, ni, pairs, Role::kTrain);
    std::vector<std::uint32_t> labels(nu + ni);
    for (auto& l : labels) l = static_cast<std::uint32_t>(rng.uniform_index(4));
    Partition p(labels);
    auto got = comfni(train, p, PairSource::kLeiden).pairs;
    CHECK(got.pairs() == oracle_pairs(train, p));
    for (const auto& [u, i] : got.pairs()) CHECK_FALSE(train.contains(u, i));

    // size = sum_c |users(c)| |items(c)| - |train pairs inside communities|
    std::vector<std::size_t> users(p.num_communities()), items(p.num_communities());
    for (NodeId v = 0; v < nu + ni; ++v) ++(v < nu ? users : items)[p.label(v)];
    std::size_t product = 0, inside = 0;
    for (std::size_t k = 0; k < users.size(); ++k) product += users[k] * items[k];
    for (const auto& [u, i] : pairs) inside += p.label(u) == p.label(static_cast<NodeId>(nu + i));
    CHECK(got.size() == product - inside);
  }
}

TEST_CASE("capped communities are skipped with a warning") {
  InteractionDataset train(3, 3, {{0, 0}}, Role::kTrain);
  ComfniOptions opts;
  opts.max_pairs_per_community = 4;
  auto r = comfni(train, Partition::whole(6), PairSource::kLeiden, opts);
  CHECK(r.pairs.empty());
  CHECK(r.warnings.size() == 1);
  opts.max_pairs_per_community = 9;
  CHECK(comfni(train, Partition::whole(6), PairSource::kLeiden, opts).pairs.size() == 8);
}

TEST_CASE("pair set membership and per-user view") {
  FalseNegativePairSet s({{2, 1}, {0, 3}, {2, 0}, {0, 3}}, PairSource::kConsensus);
  CHECK(s.size() == 3);
  CHECK(s.contains(2, 0));
  CHECK_FALSE(s.contains(1, 0));
  CHECK(s.items_of(2) == std::vector<Index>{0, 1});
  CHECK(s.items_of(1).empty());
}

TEST_CASE("fni ratio") {
  std::vector<Interaction> planted{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  CHECK(fni_ratio(FalseNegativePairSet(planted, PairSource::kLeiden), planted) == 1.0);
  CHECK(fni_ratio(FalseNegativePairSet({{0, 0}, {1, 1}, {5, 5}}, PairSource::kLeiden), planted) == 0.5);
  CHECK(fni_ratio(FalseNegativePairSet({{7, 7}}, PairSource::kLeiden), planted) == 0.0);
  CHECK_THROWS_AS(fni_ratio(FalseNegativePairSet({}, PairSource::kLeiden), {}), InvalidInputError);
}

TEST_CASE("pair files round-trip") {
  auto dir = testing::scratch_dir("comfni_io");
  std::vector<Interaction> pairs{{0, 2}, {3, 1}};
  write_pairs(dir / "p.tsv", pairs);
  CHECK(read_pairs(dir / "p.tsv") == pairs);
  CHECK(std::string(source_name(PairSource::kInfomap)) == "infomap");
}
