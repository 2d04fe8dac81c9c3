#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tpscfo/error.hpp"
#include "tpscfo/pipeline.hpp"

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::string seed, train, val, test, removed, prepared, checkpoint, out;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("-c,--config", f.config, "key = value config file");
  cmd->add_option("-s,--set", f.sets, "override one key, e.g. --set epochs=50")->take_all();
  cmd->add_option("--seed", f.seed, "global seed");
  cmd->add_option("-o,--out", f.out, "output directory");
}

// Defaults, then the config file, then flags.
tpscfo::RunConfig resolve(const Flags& f) {
  tpscfo::RunConfig cfg;
  if (!f.config.empty()) tpscfo::apply_config_file(cfg, f.config);
  for (const auto& kv : f.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw tpscfo::ConfigError("--set expects key=value, got " + kv);
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  const std::pair<const char*, const std::string*> named[] = {
      {"seed", &f.seed},         {"train", &f.train},           {"val", &f.val},
      {"test", &f.test},         {"removed", &f.removed},       {"prepared", &f.prepared},
      {"checkpoint", &f.checkpoint}, {"out", &f.out}};
  for (const auto& [key, value] : named) {
    if (!value->empty()) cfg.set(key, *value);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology-aware positive sample sets and feature optimization for MF-BPR"};
  app.require_subcommand(1);
  Flags f;

  auto* synth = app.add_subcommand("synth", "generate a planted-community dataset");
  add_common(synth, f);

  auto* prepare = app.add_subcommand("prepare", "detect communities and build positive sets");
  add_common(prepare, f);
  prepare->add_option("--train", f.train, "training interactions (user<TAB>item)");
  prepare->add_option("--val", f.val, "validation interactions");
  prepare->add_option("--test", f.test, "test interactions");
  prepare->add_option("--removed", f.removed, "planted false negatives for diagnostics");

  auto* train = app.add_subcommand("train", "train MF-BPR on prepared positives");
  add_common(train, f);
  train->add_option("--prepared", f.prepared, "prepare output directory");
  train->add_option("--checkpoint", f.checkpoint, "checkpoint path (default <out>/model.bin)");

  auto* evaluate = app.add_subcommand("evaluate", "Recall@K and NDCG@K of a checkpoint");
  add_common(evaluate, f);
  evaluate->add_option("--prepared", f.prepared, "prepare output directory");
  evaluate->add_option("--checkpoint", f.checkpoint, "checkpoint path (default <out>/model.bin)");
  evaluate->add_option("--test", f.test, "test interactions");

  auto* fni = app.add_subcommand("fni-eval", "recovery ratio of planted false negatives");
  add_common(fni, f);
  fni->add_option("--prepared", f.prepared, "prepare output directory");
  fni->add_option("--removed", f.removed, "removed pairs (user<TAB>item)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const tpscfo::RunConfig cfg = resolve(f);
    if (synth->parsed()) {
      auto r = tpscfo::cmd_synth(cfg);
      std::cout << "interactions " << r.num_interactions << ", train " << r.num_train
                << ", removed " << r.num_removed << "\n";
    } else if (prepare->parsed()) {
      auto r = tpscfo::cmd_prepare(cfg);
      std::cout << "users " << r.num_users << ", items " << r.num_items << ", candidates "
                << r.num_candidates << ", false negatives " << r.num_false_negatives << " ("
                << r.seconds << " s)\n";
    } else if (train->parsed()) {
      auto r = tpscfo::cmd_train(cfg);
      if (!r.epoch_loss.empty()) std::cout << "final loss " << r.epoch_loss.back() << "\n";
    } else if (evaluate->parsed()) {
      std::cout << tpscfo::cmd_evaluate(cfg).to_json();
    } else if (fni->parsed()) {
      std::cout << tpscfo::cmd_fni_eval(cfg).to_json();
    }
  } catch (const tpscfo::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
