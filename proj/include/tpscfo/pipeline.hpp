#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tpscfo/comfni.hpp"
#include "tpscfo/community.hpp"
#include "tpscfo/dataio.hpp"
#include "tpscfo/eval.hpp"
#include "tpscfo/recfo.hpp"
#include "tpscfo/synth.hpp"
#include "tpscfo/tpsc.hpp"

namespace tpscfo {

// Everything a command needs. Stage seeds are not stored: they derive from
// `seed` through named sub-streams, so changing one stage never shifts the
// draws of another.
struct RunConfig {
  std::uint64_t seed = 2022;

  CommunityConfig community;
  TpscConfig tpsc;
  TrainConfig train;
  PlantedSpec planted;
  SplitRatios split;
  std::vector<std::size_t> ks{10, 20};
  std::optional<std::size_t> max_pairs_per_community;

  // synth: fraction of train pairs hidden as planted false negatives, whether
  // to split at all (otherwise the whole generated set is the train file),
  // and whether the hidden pairs are appended to the test file.
  double removal_fraction = 0.1;
  bool synth_split = true;
  bool removed_to_test = false;

  std::filesystem::path train_path;
  std::filesystem::path val_path;
  std::filesystem::path test_path;
  std::filesystem::path removed_path;
  std::filesystem::path prepared_dir;
  std::filesystem::path checkpoint_path;
  std::filesystem::path out_dir;

  // Sets one key from its text form. Throws ConfigError on an unknown key or
  // a malformed value.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  // Stable "key=value" lines covering every field; hashed into manifests.
  std::string canonical() const;
  std::uint64_t hash() const;

  CommunityConfig leiden_config() const;
  CommunityConfig infomap_config() const;
  TpscConfig tpsc_config() const;
  TrainConfig train_config() const;
  PlantedSpec planted_spec() const;
};

// "key = value" lines; '#' starts a comment. Later keys win.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

struct SynthOutputs {
  std::size_t num_interactions = 0;
  std::size_t num_train = 0;
  std::size_t num_removed = 0;
};

struct PrepareOutputs {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::size_t num_candidates = 0;
  std::size_t num_false_negatives = 0;
  std::size_t num_leaked_removed = 0;
  double seconds = 0.0;
};

struct FniReport {
  std::size_t num_removed = 0;
  double leiden = 0.0;
  double infomap = 0.0;
  double consensus = 0.0;
  double filtered = 0.0;
  std::string to_json() const;
};

// Writes interactions.tsv, train.tsv, [val.tsv, test.tsv,] removed.tsv and
// planted_partition.tsv into out_dir.
SynthOutputs cmd_synth(const RunConfig& cfg);
// Community detection, ComFNI, filtration and positive-set assembly.
PrepareOutputs cmd_prepare(const RunConfig& cfg);
// Trains on <prepared>/positives.tsv; writes model.bin and loss.csv.
TrainReport cmd_train(const RunConfig& cfg);
// Scores the checkpoint on test_path; writes metrics.json and metrics.csv.
MetricReport cmd_evaluate(const RunConfig& cfg);
// Recovery of removed_path pairs by each identification stage.
FniReport cmd_fni_eval(const RunConfig& cfg);

}  // namespace tpscfo
