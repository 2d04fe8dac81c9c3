#include <doctest.h>

#include <json.hpp>
#include <map>
#include <set>

#include "support.hpp"
#include "tpscfo/error.hpp"
#include "tpscfo/pipeline.hpp"

using namespace tpscfo;
namespace fs = std::filesystem;

namespace {

const char* kSmall =
    "num_communities = 6\n"
    "users_per_comm = 20\n"
    "items_per_comm = 20\n"
    "p_in = 0.25\n"
    "removal_fraction = 0.1\n"
    "als_dim = 16\n"
    "als_iters = 6\n"
    "dim = 16\n"
    "epochs = 5\n"
    "lr = 0.01\n";

fs::path small_config(const fs::path& dir) {
  testing::write_file(dir / "run.conf", kSmall);
  return dir / "run.conf";
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(testing::read_file(p)); }

std::set<std::pair<std::string, std::string>> read_string_pairs(const fs::path& p) {
  std::set<std::pair<std::string, std::string>> out;
  std::istringstream in(testing::read_file(p));
  std::string a, b;
  while (std::getline(in, a, '\t') && std::getline(in, b)) out.emplace(a, b);
  return out;
}

std::vector<std::string> read_map(const fs::path& p) {
  std::vector<std::string> ids;
  std::istringstream in(testing::read_file(p));
  std::string index, id;
  while (std::getline(in, index, '\t') && std::getline(in, id)) ids.push_back(id);
  return ids;
}

// Runs synth -> prepare -> train -> evaluate under `root`.
void full_run(const fs::path& root, const fs::path& conf) {
  const std::string c = " --config " + conf.string();
  REQUIRE(testing::run_cli("synth" + c + " --out " + (root / "data").string()) == 0);
  REQUIRE(testing::run_cli("prepare" + c + " --train " + (root / "data/train.tsv").string() +
                           " --val " + (root / "data/val.tsv").string() + " --test " +
                           (root / "data/test.tsv").string() + " --removed " +
                           (root / "data/removed.tsv").string() + " --out " +
                           (root / "prep").string()) == 0);
  REQUIRE(testing::run_cli("train" + c + " --prepared " + (root / "prep").string() + " --out " +
                           (root / "model").string()) == 0);
  REQUIRE(testing::run_cli("evaluate" + c + " --prepared " + (root / "prep").string() +
                           " --test " + (root / "data/test.tsv").string() + " --out " +
                           (root / "model").string()) == 0);
}

}  // namespace

TEST_CASE("config text sets keys and rejects unknown ones") {
  RunConfig cfg;
  apply_config_text(cfg, "# comment\nepochs = 7 # trailing\n\nks = 5, 50\nsampler = dns\nsplit = 0.8,0.1,0.1\n",
                    "inline");
  CHECK(cfg.train.epochs == 7);
  CHECK(cfg.ks == std::vector<std::size_t>{5, 50});
  CHECK(cfg.train.sampler == SamplerKind::kDns);
  CHECK(cfg.split.train == 0.8);
  CHECK_THROWS_AS(apply_config_text(cfg, "bogus = 1\n", "inline"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "epochs = many\n", "inline"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "epochs\n", "inline"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(cfg, "feature_optimization = maybe\n", "inline"), ConfigError);
  CHECK_THROWS_AS(apply_config_file(cfg, "/nonexistent/run.conf"), ConfigError);
}

TEST_CASE("run config defaults and validation") {
  RunConfig cfg;
  CHECK(cfg.seed == 2022);
  CHECK(cfg.community.resolution == 0.01);
  CHECK(cfg.tpsc.quantile_k == 30.0);
  CHECK(cfg.train.batch_size == 2048);
  CHECK_NOTHROW(cfg.validate());
  cfg.ks.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("stage seeds are distinct sub-streams of the global seed") {
  RunConfig cfg;
  std::set<std::uint64_t> seeds{cfg.leiden_config().seed, cfg.infomap_config().seed,
                                cfg.tpsc_config().seed, cfg.train_config().seed,
                                cfg.planted_spec().seed};
  CHECK(seeds.size() == 5);
  RunConfig other = cfg;
  other.train.epochs = 3;
  CHECK(other.leiden_config().seed == cfg.leiden_config().seed);
  CHECK(other.hash() != cfg.hash());
}

TEST_CASE("cli exit codes") {
  auto dir = testing::scratch_dir("pipeline_exit");
  CHECK(testing::run_cli("") == 2);
  CHECK(testing::run_cli("frobnicate") == 2);
  CHECK(testing::run_cli("prepare --train " + (dir / "missing.tsv").string() + " --out " +
                         (dir / "p").string()) == 2);
  CHECK(testing::run_cli("synth --set bogus=1 --out " + (dir / "s").string()) == 2);
  CHECK(testing::run_cli("synth --set p_in=0 --out " + (dir / "s").string()) == 2);
  CHECK(testing::run_cli("train --prepared " + (dir / "nothing").string() + " --out " +
                         (dir / "t").string()) == 2);
}

TEST_CASE("missing train file message names the path") {
  auto dir = testing::scratch_dir("pipeline_msg");
  RunConfig cfg;
  cfg.train_path = dir / "absent.tsv";
  cfg.out_dir = dir / "out";
  try {
    cmd_prepare(cfg);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("absent.tsv") != std::string::npos);
  }
}

TEST_CASE("end-to-end run writes every artifact and manifest") {
  auto root = testing::scratch_dir("pipeline_e2e");
  full_run(root, small_config(root));
  for (const char* f : {"interactions.tsv", "train.tsv", "val.tsv", "test.tsv", "removed.tsv",
                        "planted_partition.tsv", "manifest_synth.json"}) {
    CHECK_MESSAGE(fs::exists(root / "data" / f), f);
  }
  for (const char* f : {"users.map", "items.map", "leiden.tsv", "infomap.tsv", "set_leiden.tsv",
                        "set_infomap.tsv", "candidates.tsv", "filtered.tsv", "positives.tsv",
                        "thresholds.tsv", "prepare_stats.json", "manifest_prepare.json"}) {
    CHECK_MESSAGE(fs::exists(root / "prep" / f), f);
  }
  for (const char* f : {"model.bin", "model.bin.meta", "loss.csv", "metrics.json", "metrics.csv",
                        "manifest_train.json", "manifest_evaluate.json"}) {
    CHECK_MESSAGE(fs::exists(root / "model" / f), f);
  }
  auto stats = read_json(root / "prep/prepare_stats.json");
  CHECK(stats["false_negatives"].get<int>() > 0);
  CHECK(stats.contains("fni"));
  CHECK(stats["wall_clock_seconds"].contains("total"));
  auto manifest = read_json(root / "prep/manifest_prepare.json");
  CHECK(manifest["seed"] == 2022);
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  CHECK(manifest.contains("wall_clock_seconds"));
  auto metrics = read_json(root / "model/metrics.json");
  CHECK(metrics.contains("recall@20"));
  CHECK(metrics.contains("ndcg@10"));
  const std::string loss = testing::read_file(root / "model/loss.csv");
  CHECK(loss.rfind("epoch,bpr_loss,loss\n", 0) == 0);
  CHECK(std::count(loss.begin(), loss.end(), '\n') == 6);
}

TEST_CASE("identical configs give byte-identical artifacts") {
  auto a = testing::scratch_dir("pipeline_det_a");
  auto b = testing::scratch_dir("pipeline_det_b");
  auto conf = small_config(testing::scratch_dir("pipeline_det_conf"));
  full_run(a, conf);
  full_run(b, conf);
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a);
    const std::string name = rel.filename().string();
    if (name.rfind("manifest_", 0) == 0) continue;  // wall-clock
    if (name == "prepare_stats.json") {
      auto sa = read_json(entry.path()), sb = read_json(b / rel);
      sa.erase("wall_clock_seconds");
      sb.erase("wall_clock_seconds");
      CHECK(sa == sb);
      continue;
    }
    CHECK_MESSAGE(testing::read_file(entry.path()) == testing::read_file(b / rel), rel.string());
    ++compared;
  }
  CHECK(compared >= 20);
}

TEST_CASE("no accepted false negative appears in the held-out files") {
  auto root = testing::scratch_dir("pipeline_leak");
  full_run(root, small_config(root));
  auto users = read_map(root / "prep/users.map");
  auto items = read_map(root / "prep/items.map");
  auto val = read_string_pairs(root / "data/val.tsv");
  auto test = read_string_pairs(root / "data/test.tsv");
  std::istringstream in(testing::read_file(root / "prep/positives.tsv"));
  std::string line;
  std::size_t fn = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::size_t u, i;
    std::string origin;
    fields >> u >> i >> origin;
    if (origin != "fn") continue;
    ++fn;
    const std::pair<std::string, std::string> key{users.at(u), items.at(i)};
    CHECK(val.count(key) == 0);
    CHECK(test.count(key) == 0);
  }
  CHECK(fn > 0);
}

TEST_CASE("fni-eval reports every stage and checks its inputs") {
  auto root = testing::scratch_dir("pipeline_fni");
  auto conf = small_config(root);
  full_run(root, conf);
  RunConfig cfg;
  apply_config_file(cfg, conf);
  cfg.prepared_dir = root / "prep";
  cfg.removed_path = root / "data/removed.tsv";
  auto r = cmd_fni_eval(cfg);
  CHECK(r.num_removed > 0);
  CHECK(r.filtered <= r.consensus);
  CHECK(r.consensus <= std::min(r.leiden, r.infomap));
  CHECK(fs::exists(root / "prep/fni_report.json"));

  // the same pairs the training file still holds are not hidden positives
  cfg.removed_path = root / "data/train.tsv";
  CHECK_THROWS_AS(cmd_fni_eval(cfg), ContractError);
  testing::write_file(root / "empty.tsv", "");
  cfg.removed_path = root / "empty.tsv";
  CHECK_THROWS_AS(cmd_fni_eval(cfg), InvalidInputError);
}

TEST_CASE("evaluate rejects a checkpoint of the wrong dimension") {
  auto root = testing::scratch_dir("pipeline_dim");
  auto conf = small_config(root);
  full_run(root, conf);
  RunConfig cfg;
  apply_config_file(cfg, conf);
  cfg.prepared_dir = root / "prep";
  cfg.test_path = root / "data/test.tsv";
  cfg.out_dir = root / "model";
  cfg.train.dim = 32;
  CHECK_THROWS_AS(cmd_evaluate(cfg), ContractError);
  CHECK(testing::run_cli("evaluate --config " + conf.string() + " --set dim=32 --prepared " +
                         (root / "prep").string() + " --test " + (root / "data/test.tsv").string() +
                         " --out " + (root / "model").string()) == 1);
}

TEST_CASE("a graph without shared communities yields no false negatives") {
  auto dir = testing::scratch_dir("pipeline_matching");
  std::string text;
  for (int k = 0; k < 30; ++k) text += "u" + std::to_string(k) + "\ti" + std::to_string(k) + "\n";
  testing::write_file(dir / "train.tsv", text);
  RunConfig cfg;
  cfg.train_path = dir / "train.tsv";
  cfg.out_dir = dir / "prep";
  cfg.tpsc.als_dim = 4;
  auto r = cmd_prepare(cfg);
  CHECK(r.num_false_negatives == 0);
  CHECK(testing::run_cli("prepare --train " + (dir / "train.tsv").string() + " --out " +
                         (dir / "prep2").string()) == 0);
}

TEST_CASE("prepare time grows near-linearly with the edge count") {
  auto dir = testing::scratch_dir("pipeline_scaling");
  auto time_prepare = [&](const std::string& name, std::size_t communities, double p_out) {
    RunConfig cfg;
    cfg.out_dir = dir / name;
    cfg.planted.num_communities = communities;
    cfg.planted.p_out = p_out;
    cfg.synth_split = false;
    cmd_synth(cfg);
    cfg.train_path = dir / name / "train.tsv";
    cfg.out_dir = dir / name / "prep";
    double best = 1e300;
    for (int rep = 0; rep < 2; ++rep) best = std::min(best, cmd_prepare(cfg).seconds);
    return best;
  };
  // Doubling the communities with half the cross-block density doubles |E|.
  const double base = time_prepare("x1", 20, 0.002);
  const double twice = time_prepare("x2", 40, 0.001);
  MESSAGE("prepare " << base << " s -> " << twice << " s");
  CHECK(twice < 2.5 * base);
}
