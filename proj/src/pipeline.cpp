#include "tpscfo/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "tpscfo/error.hpp"
#include "tpscfo/rng.hpp"

namespace tpscfo {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected an integer, got \"" + value + "\"");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected a number, got \"" + value + "\"");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError(key + ": expected true or false, got \"" + value + "\"");
}

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ',')) parts.push_back(trim(part));
  return parts;
}

std::string real_text(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

void require_path(const fs::path& p, const char* key) {
  if (p.empty()) throw ConfigError(std::string("missing required setting: ") + key);
}

void require_file(const fs::path& p, const char* key) {
  require_path(p, key);
  if (!fs::is_regular_file(p)) throw ConfigError(std::string(key) + " file not found: " + p.string());
}

void require_prepared(const fs::path& dir, std::initializer_list<const char*> names) {
  require_path(dir, "prepared");
  for (const char* name : names) {
    if (!fs::is_regular_file(dir / name)) {
      throw ConfigError("prepared artifact not found: " + (dir / name).string());
    }
  }
}

fs::path make_out_dir(const fs::path& dir) {
  require_path(dir, "out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("cannot create output directory " + dir.string());
  }
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  out << text;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg,
                    double seconds, json outputs) {
  json m;
  m["command"] = command;
  m["seed"] = cfg.seed;
  m["config_hash"] = hex64(cfg.hash());
  m["wall_clock_seconds"] = seconds;
  m["outputs"] = std::move(outputs);
  write_text(dir / ("manifest_" + command + ".json"), m.dump(2) + "\n");
}

// Pairs of `path` restricted to ids already in `ids`; the rest are counted.
struct KnownPairs {
  std::vector<Interaction> pairs;
  std::size_t unknown = 0;
};

KnownPairs load_known(const fs::path& path, const IdMaps& ids) {
  IdMaps extended = ids;
  InteractionDataset ds = load_dataset(path, extended);
  KnownPairs out;
  for (const auto& p : ds.interactions()) {
    if (p.user < ids.users.size() && p.item < ids.items.size()) {
      out.pairs.push_back(p);
    } else {
      ++out.unknown;
    }
  }
  return out;
}

IdMaps read_maps(const fs::path& dir) {
  return IdMaps{read_id_map(dir / "users.map"), read_id_map(dir / "items.map")};
}

double ratio(const FalseNegativePairSet& set, const KnownPairs& removed) {
  std::size_t hits = 0;
  for (const auto& p : removed.pairs) hits += set.contains(p.user, p.item) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(removed.pairs.size() + removed.unknown);
}

FniReport fni_report(const KnownPairs& removed, const PositiveSampleSet& positives,
                     const FalseNegativePairSet& leiden, const FalseNegativePairSet& infomap,
                     const FalseNegativePairSet& consensus, const FalseNegativePairSet& filtered) {
  if (removed.pairs.empty() && removed.unknown == 0) throw InvalidInputError("removed set is empty");
  for (const auto& p : removed.pairs) {
    auto s = positives.original(p.user);
    if (std::binary_search(s.begin(), s.end(), p.item)) {
      throw ContractError("removed pair (" + std::to_string(p.user) + ", " + std::to_string(p.item) +
                          ") is still a training interaction");
    }
  }
  FniReport r;
  r.num_removed = removed.pairs.size() + removed.unknown;
  r.leiden = ratio(leiden, removed);
  r.infomap = ratio(infomap, removed);
  r.consensus = ratio(consensus, removed);
  r.filtered = ratio(filtered, removed);
  return r;
}

json fni_json(const FniReport& r) {
  json j;
  j["num_removed"] = r.num_removed;
  j["leiden"] = r.leiden;
  j["infomap"] = r.infomap;
  j["consensus"] = r.consensus;
  j["filtered"] = r.filtered;
  return j;
}

json threshold_summary(const PositiveSampleSet& pos) {
  std::vector<double> t;
  for (Index u = 0; u < pos.num_users(); ++u) {
    if (auto v = pos.threshold(u)) t.push_back(*v);
  }
  json j;
  j["users_with_threshold"] = t.size();
  if (!t.empty()) {
    double sum = 0.0;
    for (double v : t) sum += v;
    j["min"] = *std::min_element(t.begin(), t.end());
    j["mean"] = sum / static_cast<double>(t.size());
    j["median"] = percentile(t, 50.0);
    j["max"] = *std::max_element(t.begin(), t.end());
  }
  return j;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "seed") seed = parse_integer<std::uint64_t>(key, v);
  else if (key == "resolution") community.resolution = parse_real(key, v);
  else if (key == "max_passes") community.max_passes = parse_integer<int>(key, v);
  else if (key == "min_gain") community.min_gain = parse_real(key, v);
  else if (key == "quantile_k") tpsc.quantile_k = parse_real(key, v);
  else if (key == "als_dim") tpsc.als_dim = parse_integer<int>(key, v);
  else if (key == "als_iters") tpsc.als_iters = parse_integer<int>(key, v);
  else if (key == "als_reg") tpsc.als_reg = parse_real(key, v);
  else if (key == "als_confidence") tpsc.als_confidence = parse_real(key, v);
  else if (key == "dim") train.dim = parse_integer<int>(key, v);
  else if (key == "lr") train.lr = parse_real(key, v);
  else if (key == "l2_lambda") train.l2_lambda = parse_real(key, v);
  else if (key == "batch_size") train.batch_size = parse_integer<std::size_t>(key, v);
  else if (key == "epochs") train.epochs = parse_integer<int>(key, v);
  else if (key == "neighborhood_n") train.neighborhood_n = parse_integer<std::size_t>(key, v);
  else if (key == "dns_pool") train.dns_pool = parse_integer<std::size_t>(key, v);
  else if (key == "feature_optimization") train.feature_optimization = parse_bool(key, v);
  else if (key == "sampler") {
    if (v == "rns") train.sampler = SamplerKind::kRns;
    else if (v == "dns") train.sampler = SamplerKind::kDns;
    else throw ConfigError("sampler: expected rns or dns, got \"" + v + "\"");
  } else if (key == "ks") {
    ks.clear();
    for (const auto& part : split_commas(v)) ks.push_back(parse_integer<std::size_t>(key, part));
  } else if (key == "split") {
    auto parts = split_commas(v);
    if (parts.size() != 3) throw ConfigError("split: expected train,test,val ratios");
    split = {parse_real(key, parts[0]), parse_real(key, parts[1]), parse_real(key, parts[2])};
  } else if (key == "max_pairs_per_community") {
    if (v.empty() || v == "none") max_pairs_per_community.reset();
    else max_pairs_per_community = parse_integer<std::size_t>(key, v);
  } else if (key == "num_communities") planted.num_communities = parse_integer<std::size_t>(key, v);
  else if (key == "users_per_comm") planted.users_per_comm = parse_integer<std::size_t>(key, v);
  else if (key == "items_per_comm") planted.items_per_comm = parse_integer<std::size_t>(key, v);
  else if (key == "p_in") planted.p_in = parse_real(key, v);
  else if (key == "p_out") planted.p_out = parse_real(key, v);
  else if (key == "removal_fraction") removal_fraction = parse_real(key, v);
  else if (key == "synth_split") synth_split = parse_bool(key, v);
  else if (key == "removed_to_test") removed_to_test = parse_bool(key, v);
  else if (key == "train") train_path = v;
  else if (key == "val") val_path = v;
  else if (key == "test") test_path = v;
  else if (key == "removed") removed_path = v;
  else if (key == "prepared") prepared_dir = v;
  else if (key == "checkpoint") checkpoint_path = v;
  else if (key == "out") out_dir = v;
  else throw ConfigError("unknown config key \"" + key + "\"");
}

void RunConfig::validate() const {
  community.validate();
  tpsc.validate();
  train.validate();
  planted.validate();
  if (ks.empty()) throw ConfigError("ks must list at least one cutoff");
  for (auto k : ks) {
    if (k == 0) throw ConfigError("ks entries must be >= 1");
  }
  if (!(removal_fraction >= 0.0 && removal_fraction < 1.0)) {
    throw ConfigError("removal_fraction must be in [0, 1)");
  }
  if (max_pairs_per_community && *max_pairs_per_community == 0) {
    throw ConfigError("max_pairs_per_community must be >= 1");
  }
}

std::string RunConfig::canonical() const {
  std::ostringstream s;
  s << "seed=" << seed << '\n'
    << "resolution=" << real_text(community.resolution) << '\n'
    << "max_passes=" << community.max_passes << '\n'
    << "min_gain=" << real_text(community.min_gain) << '\n'
    << "quantile_k=" << real_text(tpsc.quantile_k) << '\n'
    << "als_dim=" << tpsc.als_dim << '\n'
    << "als_iters=" << tpsc.als_iters << '\n'
    << "als_reg=" << real_text(tpsc.als_reg) << '\n'
    << "als_confidence=" << real_text(tpsc.als_confidence) << '\n'
    << "train=" << train.canonical() << '\n'
    << "ks=";
  for (std::size_t j = 0; j < ks.size(); ++j) s << (j ? "," : "") << ks[j];
  s << '\n'
    << "split=" << real_text(split.train) << ',' << real_text(split.test) << ','
    << real_text(split.val) << '\n'
    << "max_pairs_per_community="
    << (max_pairs_per_community ? std::to_string(*max_pairs_per_community) : "none") << '\n'
    << "planted=" << planted.num_communities << ',' << planted.users_per_comm << ','
    << planted.items_per_comm << ',' << real_text(planted.p_in) << ','
    << real_text(planted.p_out) << '\n'
    << "removal_fraction=" << real_text(removal_fraction) << '\n'
    << "synth_split=" << synth_split << '\n'
    << "removed_to_test=" << removed_to_test << '\n'
    << "train_path=" << train_path.string() << '\n'
    << "val_path=" << val_path.string() << '\n'
    << "test_path=" << test_path.string() << '\n'
    << "removed_path=" << removed_path.string() << '\n'
    << "prepared=" << prepared_dir.string() << '\n'
    << "checkpoint=" << checkpoint_path.string() << '\n'
    << "out=" << out_dir.string() << '\n';
  return s.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

CommunityConfig RunConfig::leiden_config() const {
  CommunityConfig c = community;
  c.seed = substream_seed(seed, "leiden");
  return c;
}

CommunityConfig RunConfig::infomap_config() const {
  CommunityConfig c = community;
  c.seed = substream_seed(seed, "infomap");
  return c;
}

TpscConfig RunConfig::tpsc_config() const {
  TpscConfig c = tpsc;
  c.seed = substream_seed(seed, "als");
  return c;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig c = train;
  c.seed = substream_seed(seed, "train");
  return c;
}

PlantedSpec RunConfig::planted_spec() const {
  PlantedSpec s = planted;
  s.seed = substream_seed(seed, "synth");
  return s;
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(cfg, buf.str(), path.string());
}

std::string FniReport::to_json() const { return fni_json(*this).dump(2) + "\n"; }

SynthOutputs cmd_synth(const RunConfig& cfg) {
  const auto start = Clock::now();
  cfg.validate();
  const fs::path out = make_out_dir(cfg.out_dir);

  const PlantedSpec spec = cfg.planted_spec();
  PlantedData pd = generate_planted(spec);
  IdMaps ids;
  for (std::size_t u = 0; u < spec.num_users(); ++u) ids.users.get_or_add("u" + std::to_string(u));
  for (std::size_t i = 0; i < spec.num_items(); ++i) ids.items.get_or_add("i" + std::to_string(i));
  write_dataset(out / "interactions.tsv", pd.data, ids);
  {
    std::ostringstream s;
    for (std::size_t v = 0; v < pd.truth.num_nodes(); ++v) {
      const bool user = v < spec.num_users();
      s << (user ? ids.users.id(static_cast<Index>(v))
                 : ids.items.id(static_cast<Index>(v - spec.num_users())))
        << '\t' << pd.truth.label(static_cast<NodeId>(v)) << '\n';
    }
    write_text(out / "planted_partition.tsv", s.str());
  }

  InteractionDataset base = pd.data.with_role(Role::kTrain);
  std::optional<DatasetSplit> split;
  if (cfg.synth_split) {
    split = split_dataset(pd.data, cfg.split, substream_seed(cfg.seed, "split"));
    base = split->train;
  }
  SynthOutputs result;
  result.num_interactions = pd.data.size();
  std::vector<Interaction> removed;
  if (cfg.removal_fraction > 0.0) {
    PlantedRemoval rem =
        plant_false_negatives(base, cfg.removal_fraction, substream_seed(cfg.seed, "synth-removal"));
    base = rem.reduced_train;
    removed = std::move(rem.removed);
    write_dataset(out / "removed.tsv",
                  InteractionDataset(spec.num_users(), spec.num_items(), removed, Role::kTest), ids);
  }
  write_dataset(out / "train.tsv", base, ids);
  if (split) {
    write_dataset(out / "val.tsv", split->val, ids);
    std::vector<Interaction> test = split->test.interactions();
    if (cfg.removed_to_test) test.insert(test.end(), removed.begin(), removed.end());
    write_dataset(out / "test.tsv",
                  InteractionDataset(spec.num_users(), spec.num_items(), std::move(test), Role::kTest),
                  ids);
  }
  result.num_train = base.size();
  result.num_removed = removed.size();

  json outputs;
  outputs["interactions"] = result.num_interactions;
  outputs["train"] = result.num_train;
  outputs["removed"] = result.num_removed;
  write_manifest(out, "synth", cfg, seconds_since(start), outputs);
  return result;
}

PrepareOutputs cmd_prepare(const RunConfig& cfg) {
  const auto start = Clock::now();
  cfg.validate();
  require_file(cfg.train_path, "train");
  if (!cfg.val_path.empty()) require_file(cfg.val_path, "val");
  if (!cfg.test_path.empty()) require_file(cfg.test_path, "test");
  if (!cfg.removed_path.empty()) require_file(cfg.removed_path, "removed");
  const fs::path out = make_out_dir(cfg.out_dir);

  // One id space across every file so held-out pairs are comparable with F.
  IdMaps ids;
  InteractionDataset train = load_dataset(cfg.train_path, ids);
  std::vector<Interaction> val_pairs, test_pairs;
  if (!cfg.val_path.empty()) val_pairs = load_dataset(cfg.val_path, ids).interactions();
  if (!cfg.test_path.empty()) test_pairs = load_dataset(cfg.test_path, ids).interactions();
  const std::size_t nu = ids.users.size(), ni = ids.items.size();
  train = train.resized(nu, ni).with_role(Role::kTrain);
  InteractionDataset val(nu, ni, std::move(val_pairs), Role::kValidation);
  InteractionDataset test(nu, ni, std::move(test_pairs), Role::kTest);

  json timings;
  auto stage = Clock::now();
  const BipartiteGraph graph = build_bipartite(train);
  const Partition ld = leiden(graph.graph(), cfg.leiden_config());
  timings["leiden"] = seconds_since(stage);
  stage = Clock::now();
  const Partition im = infomap_two_level(graph.graph(), cfg.infomap_config());
  timings["infomap"] = seconds_since(stage);
  stage = Clock::now();
  ComfniOptions options;
  options.max_pairs_per_community = cfg.max_pairs_per_community;
  TpscArtifacts art = run_tpsc(train, val, test, cfg.tpsc_config(), ld, im, options);
  timings["tpsc"] = seconds_since(stage);

  const std::size_t leaked = count_leaked(art.positives, val) + count_leaked(art.positives, test);
  if (leaked != 0) {
    throw ContractError(std::to_string(leaked) + " false-negative pairs appear in val/test");
  }

  write_id_map(out / "users.map", ids.users);
  write_id_map(out / "items.map", ids.items);
  write_partition(out / "leiden.tsv", ld);
  write_partition(out / "infomap.tsv", im);
  write_pairs(out / "set_leiden.tsv", art.set_leiden.pairs());
  write_pairs(out / "set_infomap.tsv", art.set_infomap.pairs());
  const FalseNegativePairSet consensus = art.candidate_pairs();
  write_pairs(out / "candidates.tsv", consensus.pairs());
  const FalseNegativePairSet filtered(art.positives.filtered_pairs(), PairSource::kFiltered);
  write_pairs(out / "filtered.tsv", filtered.pairs());
  art.positives.write(out / "positives.tsv", out / "thresholds.tsv");

  PrepareOutputs result;
  result.num_users = nu;
  result.num_items = ni;
  result.num_candidates = consensus.size();
  result.num_false_negatives = art.positives.total_false_negatives();

  json stats;
  stats["num_users"] = nu;
  stats["num_items"] = ni;
  stats["train_pairs"] = train.size();
  stats["val_pairs"] = val.size();
  stats["test_pairs"] = test.size();
  stats["graph_edges"] = graph.num_edges();
  stats["leiden_communities"] = ld.num_communities();
  stats["infomap_communities"] = im.num_communities();
  stats["set_leiden"] = art.set_leiden.size();
  stats["set_infomap"] = art.set_infomap.size();
  stats["candidates"] = consensus.size();
  stats["filtered_before_leakage"] = filtered.size();
  stats["false_negatives"] = result.num_false_negatives;
  stats["positives"] = art.positives.total_positives();
  stats["thresholds"] = threshold_summary(art.positives);
  std::vector<std::string> warnings = art.warnings;
  if (cfg.val_path.empty() || cfg.test_path.empty()) {
    warnings.push_back("no val/test given: leakage removal had nothing to check against");
  }
  stats["warnings"] = warnings;
  if (!cfg.removed_path.empty()) {
    const KnownPairs removed = load_known(cfg.removed_path, ids);
    const FniReport fni = fni_report(removed, art.positives, art.set_leiden, art.set_infomap,
                                     consensus, filtered);
    stats["fni"] = fni_json(fni);
  }
  result.seconds = seconds_since(start);
  timings["total"] = result.seconds;
  stats["wall_clock_seconds"] = timings;
  write_text(out / "prepare_stats.json", stats.dump(2) + "\n");

  json outputs;
  outputs["false_negatives"] = result.num_false_negatives;
  outputs["candidates"] = result.num_candidates;
  write_manifest(out, "prepare", cfg, result.seconds, outputs);
  return result;
}

TrainReport cmd_train(const RunConfig& cfg) {
  const auto start = Clock::now();
  cfg.validate();
  require_prepared(cfg.prepared_dir, {"users.map", "items.map", "positives.tsv", "thresholds.tsv"});
  const fs::path out = make_out_dir(cfg.out_dir);

  const IdMaps ids = read_maps(cfg.prepared_dir);
  const PositiveSampleSet positives =
      PositiveSampleSet::read(cfg.prepared_dir / "positives.tsv",
                              cfg.prepared_dir / "thresholds.tsv", ids.users.size(), ids.items.size());
  const TrainConfig tc = cfg.train_config();
  TrainReport report;
  const MFModel model = train(positives, tc, &report);

  const fs::path ckpt = cfg.checkpoint_path.empty() ? out / "model.bin" : cfg.checkpoint_path;
  save_checkpoint(ckpt, model, tc.seed, fnv1a64(tc.canonical()));
  {
    std::ostringstream meta;
    meta << "dim=" << model.dim() << "\nusers=" << model.num_users() << "\nitems="
         << model.num_items() << "\nseed=" << tc.seed << "\nconfig_hash="
         << hex64(fnv1a64(tc.canonical())) << "\nconfig=" << tc.canonical() << "\n";
    write_text(ckpt.string() + ".meta", meta.str());
  }
  std::ostringstream loss;
  loss << "epoch,bpr_loss,loss\n";
  for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
    char line[96];
    std::snprintf(line, sizeof line, "%zu,%.9g,%.9g\n", e + 1, report.epoch_bpr_loss[e],
                  report.epoch_loss[e]);
    loss << line;
  }
  write_text(out / "loss.csv", loss.str());

  json outputs;
  outputs["checkpoint"] = ckpt.string();
  outputs["epochs"] = report.epoch_loss.size();
  if (!report.epoch_loss.empty()) outputs["final_loss"] = report.epoch_loss.back();
  write_manifest(out, "train", cfg, seconds_since(start), outputs);
  return report;
}

MetricReport cmd_evaluate(const RunConfig& cfg) {
  const auto start = Clock::now();
  cfg.validate();
  require_prepared(cfg.prepared_dir, {"users.map", "items.map", "positives.tsv", "thresholds.tsv"});
  const fs::path ckpt = cfg.checkpoint_path.empty() ? cfg.out_dir / "model.bin" : cfg.checkpoint_path;
  require_file(ckpt, "checkpoint");
  require_file(cfg.test_path, "test");
  const fs::path out = make_out_dir(cfg.out_dir);

  const Checkpoint cp = load_checkpoint(ckpt);
  if (cp.model.dim() != cfg.train.dim) {
    throw ContractError("checkpoint has dim " + std::to_string(cp.model.dim()) +
                        " but the config says " + std::to_string(cfg.train.dim));
  }
  const IdMaps ids = read_maps(cfg.prepared_dir);
  if (cp.model.num_users() != ids.users.size() || cp.model.num_items() != ids.items.size()) {
    throw ContractError("checkpoint tables do not match the prepared id maps");
  }
  const PositiveSampleSet positives =
      PositiveSampleSet::read(cfg.prepared_dir / "positives.tsv",
                              cfg.prepared_dir / "thresholds.tsv", ids.users.size(), ids.items.size());
  KnownPairs known = load_known(cfg.test_path, ids);
  const InteractionDataset test(ids.users.size(), ids.items.size(), std::move(known.pairs), Role::kTest);

  const MetricReport report = evaluate(cp.model, positives, test, cfg.ks);
  write_text(out / "metrics.json", report.to_json());
  write_text(out / "metrics.csv", report.to_csv());

  json outputs;
  outputs["evaluated_users"] = report.num_evaluated_users;
  outputs["skipped_unknown_pairs"] = known.unknown;
  write_manifest(out, "evaluate", cfg, seconds_since(start), outputs);
  return report;
}

FniReport cmd_fni_eval(const RunConfig& cfg) {
  const auto start = Clock::now();
  cfg.validate();
  require_prepared(cfg.prepared_dir, {"users.map", "items.map", "positives.tsv", "thresholds.tsv",
                                      "set_leiden.tsv", "set_infomap.tsv", "candidates.tsv",
                                      "filtered.tsv"});
  require_file(cfg.removed_path, "removed");
  const fs::path out = make_out_dir(cfg.out_dir.empty() ? cfg.prepared_dir : cfg.out_dir);

  const fs::path& dir = cfg.prepared_dir;
  const IdMaps ids = read_maps(dir);
  const PositiveSampleSet positives = PositiveSampleSet::read(
      dir / "positives.tsv", dir / "thresholds.tsv", ids.users.size(), ids.items.size());
  KnownPairs removed;
  try {
    removed = load_known(cfg.removed_path, ids);
  } catch (const EmptyDatasetError&) {
    throw InvalidInputError("removed set is empty: " + cfg.removed_path.string());
  }
  const FniReport report = fni_report(
      removed, positives, FalseNegativePairSet(read_pairs(dir / "set_leiden.tsv"), PairSource::kLeiden),
      FalseNegativePairSet(read_pairs(dir / "set_infomap.tsv"), PairSource::kInfomap),
      FalseNegativePairSet(read_pairs(dir / "candidates.tsv"), PairSource::kConsensus),
      FalseNegativePairSet(read_pairs(dir / "filtered.tsv"), PairSource::kFiltered));
  write_text(out / "fni_report.json", report.to_json());
  write_manifest(out, "fni-eval", cfg, seconds_since(start), fni_json(report));
  return report;
}

}  // namespace tpscfo
