#include "tpscfo/community.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "tpscfo/error.hpp"
#include "tpscfo/rng.hpp"

namespace tpscfo {

Partition::Partition(const std::vector<std::uint32_t>& raw_labels) {
  labels_.resize(raw_labels.size());
  std::vector<CommunityId> remap;
  const CommunityId unset = ~CommunityId{0};
  for (std::size_t v = 0; v < raw_labels.size(); ++v) {
    const auto raw = raw_labels[v];
    if (raw >= remap.size()) remap.resize(static_cast<std::size_t>(raw) + 1, unset);
    if (remap[raw] == unset) remap[raw] = static_cast<CommunityId>(num_communities_++);
    labels_[v] = remap[raw];
  }
}

Partition Partition::singletons(std::size_t num_nodes) {
  std::vector<std::uint32_t> labels(num_nodes);
  std::iota(labels.begin(), labels.end(), 0u);
  return Partition(labels);
}

Partition Partition::whole(std::size_t num_nodes) {
  return Partition(std::vector<std::uint32_t>(num_nodes, 0u));
}

std::vector<std::vector<NodeId>> Partition::members() const {
  std::vector<std::vector<NodeId>> out(num_communities_);
  for (NodeId v = 0; v < labels_.size(); ++v) out[labels_[v]].push_back(v);
  return out;
}

void CommunityConfig::validate() const {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw ConfigError("community resolution must be positive");
  }
  if (max_passes < 1) throw ConfigError("community max_passes must be >= 1");
  if (!(min_gain >= 0.0)) throw ConfigError("community min_gain must be non-negative");
}

namespace {

constexpr double kTieEps = 1e-13;

double plogp(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

void check_sizes(const UndirectedGraph& g, const Partition& p) {
  if (p.num_nodes() != g.num_nodes()) {
    throw ContractError("partition covers " + std::to_string(p.num_nodes()) +
                        " nodes, graph has " + std::to_string(g.num_nodes()));
  }
  if (g.num_edges() == 0) throw UndefinedQualityError("quality is undefined on an edgeless graph");
}

// Weighted graph used across aggregation levels. Self-loop weight holds the
// edges collapsed into a node (each counted once).
struct WeightedGraph {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> neighbors;
  std::vector<double> weights;
  std::vector<double> self;
  std::vector<double> strength;
  double total = 0.0;

  std::size_t size() const { return self.size(); }
};

WeightedGraph from_graph(const UndirectedGraph& g, std::span<const NodeId> order) {
  const std::size_t n = g.num_nodes();
  std::vector<std::uint32_t> position(n);
  for (std::size_t k = 0; k < n; ++k) position[order[k]] = static_cast<std::uint32_t>(k);

  WeightedGraph wg;
  wg.offsets.assign(n + 1, 0);
  wg.self.assign(n, 0.0);
  wg.strength.assign(n, 0.0);
  wg.neighbors.reserve(2 * g.num_edges());
  for (std::size_t k = 0; k < n; ++k) {
    const auto first = wg.neighbors.size();
    for (NodeId w : g.neighbors(order[k])) wg.neighbors.push_back(position[w]);
    std::sort(wg.neighbors.begin() + static_cast<std::ptrdiff_t>(first), wg.neighbors.end());
    wg.offsets[k + 1] = wg.neighbors.size();
    wg.strength[k] = static_cast<double>(wg.neighbors.size() - first);
  }
  wg.weights.assign(wg.neighbors.size(), 1.0);
  wg.total = static_cast<double>(g.num_edges());
  return wg;
}

// Renumbers labels densely by first appearance; returns the count.
std::size_t renumber(std::vector<std::uint32_t>& labels) {
  const auto unset = ~std::uint32_t{0};
  std::vector<std::uint32_t> remap(labels.size(), unset);
  std::uint32_t next = 0;
  for (auto& l : labels) {
    if (remap[l] == unset) remap[l] = next++;
    l = remap[l];
  }
  return next;
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<std::uint32_t>& comm,
                        std::size_t num_comms) {
  std::vector<std::vector<std::uint32_t>> members(num_comms);
  for (std::uint32_t v = 0; v < g.size(); ++v) members[comm[v]].push_back(v);

  WeightedGraph out;
  out.offsets.assign(num_comms + 1, 0);
  out.self.assign(num_comms, 0.0);
  out.strength.assign(num_comms, 0.0);
  out.total = g.total;

  std::vector<double> acc(num_comms, 0.0);
  std::vector<char> seen(num_comms, 0);
  std::vector<std::uint32_t> touched;
  for (std::uint32_t c = 0; c < num_comms; ++c) {
    touched.clear();
    double internal_twice = 0.0;
    for (auto v : members[c]) {
      out.self[c] += g.self[v];
      out.strength[c] += g.strength[v];
      for (auto e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
        const auto d = comm[g.neighbors[e]];
        if (d == c) {
          internal_twice += g.weights[e];
        } else {
          if (!seen[d]) {
            seen[d] = 1;
            touched.push_back(d);
          }
          acc[d] += g.weights[e];
        }
      }
    }
    out.self[c] += internal_twice / 2.0;
    std::sort(touched.begin(), touched.end());
    for (auto d : touched) {
      out.neighbors.push_back(d);
      out.weights.push_back(acc[d]);
      acc[d] = 0.0;
      seen[d] = 0;
    }
    out.offsets[c + 1] = out.neighbors.size();
  }
  return out;
}

// Sum over communities of the weight between distinct members, counted from
// both ends.
std::vector<double> internal_weight_twice(const WeightedGraph& g,
                                          const std::vector<std::uint32_t>& comm,
                                          std::size_t num_comms) {
  std::vector<double> inside(num_comms, 0.0);
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    for (auto e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      if (comm[g.neighbors[e]] == comm[v]) inside[comm[v]] += g.weights[e];
    }
  }
  return inside;
}

std::size_t label_bound(const std::vector<std::uint32_t>& comm) {
  return comm.empty() ? 0 : *std::max_element(comm.begin(), comm.end()) + std::size_t{1};
}

class ModularityObjective {
 public:
  static constexpr bool kHigherIsBetter = true;

  ModularityObjective(const WeightedGraph& g, double gamma) : g_(g), gamma_(gamma) {}

  void reset(const std::vector<std::uint32_t>& comm) {
    tot_.assign(g_.size(), 0.0);
    for (std::uint32_t v = 0; v < g_.size(); ++v) tot_[comm[v]] += g_.strength[v];
  }
  void remove(std::uint32_t v, std::uint32_t c, double /*k_vc*/) { tot_[c] -= g_.strength[v]; }
  void insert(std::uint32_t v, std::uint32_t c, double /*k_vc*/) { tot_[c] += g_.strength[v]; }
  // Modularity change of joining c from isolation.
  double insert_score(std::uint32_t v, std::uint32_t c, double k_vc) const {
    const double m = g_.total;
    return k_vc / m - gamma_ * g_.strength[v] * tot_[c] / (2.0 * m * m);
  }

  double quality(const std::vector<std::uint32_t>& comm) const {
    const std::size_t nc = label_bound(comm);
    auto inside = internal_weight_twice(g_, comm, nc);
    std::vector<double> tot(nc, 0.0), in(nc, 0.0);
    for (std::uint32_t v = 0; v < g_.size(); ++v) {
      tot[comm[v]] += g_.strength[v];
      in[comm[v]] += g_.self[v];
    }
    const double m = g_.total;
    double q = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const double frac = tot[c] / (2.0 * m);
      q += (in[c] + inside[c] / 2.0) / m - gamma_ * frac * frac;
    }
    return q;
  }

 private:
  const WeightedGraph& g_;
  double gamma_;
  std::vector<double> tot_;
};

// Two-level map equation
//   L = plogp(q) - 2 sum_c plogp(q_c) - sum_v plogp(p_v) + sum_c plogp(q_c + p_c)
// with q_c the exit flow of module c and q = sum_c q_c. The node entropy term
// is fixed by the original graph and carried through aggregation.
class MapEquationObjective {
 public:
  static constexpr bool kHigherIsBetter = false;

  MapEquationObjective(const WeightedGraph& g, double node_plogp_sum)
      : g_(g), node_plogp_sum_(node_plogp_sum) {
    const double two_m = 2.0 * g.total;
    flow_.resize(g.size());
    exit_.resize(g.size());
    for (std::uint32_t v = 0; v < g.size(); ++v) {
      flow_[v] = g.strength[v] / two_m;
      exit_[v] = (g.strength[v] - 2.0 * g.self[v]) / two_m;
    }
  }

  void reset(const std::vector<std::uint32_t>& comm) {
    module_flow_.assign(g_.size(), 0.0);
    module_exit_.assign(g_.size(), 0.0);
    auto inside = internal_weight_twice(g_, comm, g_.size());
    for (std::uint32_t v = 0; v < g_.size(); ++v) {
      module_flow_[comm[v]] += flow_[v];
      module_exit_[comm[v]] += exit_[v];
    }
    exit_sum_ = 0.0;
    for (std::size_t c = 0; c < g_.size(); ++c) {
      module_exit_[c] = std::max(0.0, module_exit_[c] - inside[c] / (2.0 * g_.total));
      exit_sum_ += module_exit_[c];
    }
  }

  // After remove(), v counts as a module of its own.
  void remove(std::uint32_t v, std::uint32_t c, double k_vc) {
    const double before = module_exit_[c];
    module_flow_[c] -= flow_[v];
    module_exit_[c] = std::max(0.0, before - exit_[v] + k_vc / g_.total);
    exit_sum_ += module_exit_[c] - before + exit_[v];
  }
  void insert(std::uint32_t v, std::uint32_t c, double k_vc) {
    const double before = module_exit_[c];
    module_flow_[c] += flow_[v];
    module_exit_[c] = std::max(0.0, before + exit_[v] - k_vc / g_.total);
    exit_sum_ += module_exit_[c] - before - exit_[v];
  }
  // Codelength saved (bits) by merging the lone v into module c.
  double insert_score(std::uint32_t v, std::uint32_t c, double k_vc) const {
    const double qc = module_exit_[c];
    const double pc = module_flow_[c];
    const double qv = exit_[v];
    const double pv = flow_[v];
    const double merged = std::max(0.0, qc + qv - k_vc / g_.total);
    const double total_after = exit_sum_ - qv - qc + merged;
    return plogp(exit_sum_) - plogp(total_after) -
           2.0 * (plogp(qc) + plogp(qv) - plogp(merged)) +
           (plogp(qc + pc) + plogp(qv + pv) - plogp(merged + pc + pv));
  }

  double quality(const std::vector<std::uint32_t>& comm) const {
    const std::size_t nc = label_bound(comm);
    auto inside = internal_weight_twice(g_, comm, nc);
    std::vector<double> q(nc, 0.0), p(nc, 0.0);
    for (std::uint32_t v = 0; v < g_.size(); ++v) {
      q[comm[v]] += exit_[v];
      p[comm[v]] += flow_[v];
    }
    double total_exit = 0.0, sum_exit = 0.0, sum_both = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      q[c] = std::max(0.0, q[c] - inside[c] / (2.0 * g_.total));
      total_exit += q[c];
      sum_exit += plogp(q[c]);
      sum_both += plogp(q[c] + p[c]);
    }
    return plogp(total_exit) - 2.0 * sum_exit - node_plogp_sum_ + sum_both;
  }

 private:
  const WeightedGraph& g_;
  double node_plogp_sum_;
  std::vector<double> flow_, exit_, module_flow_, module_exit_;
  double exit_sum_ = 0.0;
};

// Greedy local moving over `order` until a sweep gains less than min_gain or
// max_passes sweeps ran. Returns true if any node changed community.
template <typename Objective>
bool local_moving(const WeightedGraph& g, std::vector<std::uint32_t>& comm, Objective& objective,
                  std::span<const std::uint32_t> order, const CommunityConfig& cfg,
                  DetectionTrace* trace) {
  objective.reset(comm);
  if (trace) trace->quality.push_back(objective.quality(comm));

  std::vector<double> link(g.size(), 0.0);
  std::vector<char> seen(g.size(), 0);
  std::vector<std::uint32_t> touched;
  bool moved_any = false;

  for (int sweep = 0; sweep < cfg.max_passes; ++sweep) {
    double sweep_gain = 0.0;
    bool moved = false;
    for (auto v : order) {
      const auto old = comm[v];
      touched.clear();
      for (auto e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
        const auto c = comm[g.neighbors[e]];
        if (!seen[c]) {
          seen[c] = 1;
          touched.push_back(c);
        }
        link[c] += g.weights[e];
      }
      std::sort(touched.begin(), touched.end());

      const double k_old = link[old];
      objective.remove(v, old, k_old);
      const double stay = objective.insert_score(v, old, k_old);
      auto best = old;
      double best_score = stay;
      // Ascending scan with strict improvement keeps the smallest id among
      // equal-gain targets; staying wins ties.
      for (auto c : touched) {
        if (c == old) continue;
        const double s = objective.insert_score(v, c, link[c]);
        if (s > best_score + kTieEps) {
          best = c;
          best_score = s;
        }
      }
      objective.insert(v, best, link[best]);
      if (best != old) {
        comm[v] = best;
        moved = true;
        sweep_gain += best_score - stay;
      }
      for (auto c : touched) {
        link[c] = 0.0;
        seen[c] = 0;
      }
    }
    if (trace) trace->quality.push_back(objective.quality(comm));
    moved_any = moved_any || moved;
    if (!moved || sweep_gain < cfg.min_gain) break;
    objective.reset(comm);
  }
  return moved_any;
}

std::vector<std::uint32_t> identity(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

std::vector<std::uint32_t> level_order(std::size_t n, int level, Rng& rng) {
  auto order = identity(n);
  if (level > 0) rng.shuffle(order);
  return order;
}

// Louvain-style multilevel driver: local moving from `comm`, aggregation,
// repeat from singletons. Returns the module of every node of `g`.
template <typename MakeObjective>
std::vector<std::uint32_t> multilevel(WeightedGraph g, std::vector<std::uint32_t> comm,
                                      const CommunityConfig& cfg, Rng& rng, DetectionTrace* trace,
                                      MakeObjective make_objective, bool shuffle_first = false) {
  auto node_to_comm = identity(g.size());
  for (int level = 0; level < cfg.max_passes; ++level) {
    auto order = level_order(g.size(), shuffle_first ? level + 1 : level, rng);
    auto objective = make_objective(g);
    local_moving(g, comm, objective, order, cfg, trace);
    if (trace) trace->levels += 1;
    const auto nc = renumber(comm);
    for (auto& c : node_to_comm) c = comm[c];
    if (nc == g.size()) break;
    g = aggregate(g, comm, nc);
    comm = identity(nc);
  }
  return node_to_comm;
}

// Two-level Infomap search: multilevel moving from singletons, then repeated
// fine-tuning rounds that re-run local moving on the original nodes from the
// current modules and re-aggregate, kept while they shorten the code.
template <typename MakeObjective>
std::vector<std::uint32_t> infomap_search(const WeightedGraph& g, const CommunityConfig& cfg,
                                          Rng& rng, DetectionTrace* trace,
                                          MakeObjective make_objective) {
  auto best = multilevel(g, identity(g.size()), cfg, rng, trace, make_objective);
  double best_length = make_objective(g).quality(best);
  for (int round = 0; round < cfg.max_passes; ++round) {
    auto candidate = multilevel(g, best, cfg, rng, trace, make_objective, true);
    const double length = make_objective(g).quality(candidate);
    const bool improved = length < best_length - cfg.min_gain;
    if (length < best_length) {
      best = std::move(candidate);
      best_length = length;
    }
    if (!improved) break;
  }
  return best;
}

// Leiden refinement: inside each community of `comm`, start from singletons
// and greedily merge well-connected singleton nodes into adjacent
// well-connected sub-communities with non-negative modularity gain.
std::vector<std::uint32_t> refine(const WeightedGraph& g, const std::vector<std::uint32_t>& comm,
                                  std::size_t num_comms, double gamma,
                                  std::span<const std::uint32_t> order) {
  const std::size_t n = g.size();
  const double two_m = 2.0 * g.total;
  auto refined = identity(n);
  std::vector<double> comm_total(num_comms, 0.0);
  std::vector<double> link_to_comm(n, 0.0);
  for (std::uint32_t v = 0; v < n; ++v) {
    comm_total[comm[v]] += g.strength[v];
    for (auto e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      if (comm[g.neighbors[e]] == comm[v]) link_to_comm[v] += g.weights[e];
    }
  }
  std::vector<double> sub_total(g.strength);
  std::vector<double> sub_external(link_to_comm);
  std::vector<char> untouched(n, 1);

  std::vector<double> link(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> touched;
  for (auto v : order) {
    if (!untouched[refined[v]]) continue;
    const auto s = comm[v];
    const double kv = g.strength[v];
    if (link_to_comm[v] < gamma * kv * (comm_total[s] - kv) / two_m) continue;

    touched.clear();
    for (auto e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      const auto w = g.neighbors[e];
      if (comm[w] != s) continue;
      const auto r = refined[w];
      if (!seen[r]) {
        seen[r] = 1;
        touched.push_back(r);
      }
      link[r] += g.weights[e];
    }
    std::sort(touched.begin(), touched.end());
    auto best = refined[v];
    double best_gain = -kTieEps;
    for (auto r : touched) {
      const bool well_connected =
          sub_external[r] >= gamma * sub_total[r] * (comm_total[s] - sub_total[r]) / two_m;
      if (!well_connected) continue;
      const double gain = link[r] - gamma * kv * sub_total[r] / two_m;
      if (gain > best_gain + kTieEps) {
        best = r;
        best_gain = gain;
      }
    }
    if (best != refined[v]) {
      untouched[refined[v]] = 0;
      untouched[best] = 0;
      sub_total[best] += kv;
      sub_external[best] += link_to_comm[v] - 2.0 * link[best];
      refined[v] = best;
    }
    for (auto r : touched) {
      link[r] = 0.0;
      seen[r] = 0;
    }
  }
  return refined;
}

std::vector<std::uint32_t> leiden_levels(WeightedGraph g, const CommunityConfig& cfg, Rng& rng,
                                         DetectionTrace* trace) {
  auto node_to_agg = identity(g.size());
  auto comm = identity(g.size());
  for (int level = 0; level < cfg.max_passes; ++level) {
    auto order = level_order(g.size(), level, rng);
    ModularityObjective objective(g, cfg.resolution);
    local_moving(g, comm, objective, order, cfg, trace);
    if (trace) trace->levels += 1;
    const auto nc = renumber(comm);
    if (nc == g.size()) break;

    auto refined = refine(g, comm, nc, cfg.resolution, order);
    const auto nr = renumber(refined);
    if (nr == g.size()) break;
    std::vector<std::uint32_t> next_comm(nr);
    for (std::uint32_t v = 0; v < g.size(); ++v) next_comm[refined[v]] = comm[v];
    for (auto& a : node_to_agg) a = refined[a];
    g = aggregate(g, refined, nr);
    comm = std::move(next_comm);
  }
  std::vector<std::uint32_t> labels(node_to_agg.size());
  for (std::size_t v = 0; v < labels.size(); ++v) labels[v] = comm[node_to_agg[v]];
  return labels;
}

// Splits every community into its connected components.
Partition split_disconnected(const UndirectedGraph& g, const Partition& p) {
  std::vector<std::uint32_t> labels(g.num_nodes(), ~std::uint32_t{0});
  std::uint32_t next = 0;
  std::vector<NodeId> stack;
  for (NodeId start = 0; start < g.num_nodes(); ++start) {
    if (labels[start] != ~std::uint32_t{0}) continue;
    labels[start] = next;
    stack.assign(1, start);
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto w : g.neighbors(v)) {
        if (labels[w] == ~std::uint32_t{0} && p.label(w) == p.label(start)) {
          labels[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return Partition(labels);
}

}  // namespace

double modularity(const UndirectedGraph& g, const Partition& p, double resolution) {
  check_sizes(g, p);
  const double m = static_cast<double>(g.num_edges());
  std::vector<double> inside(p.num_communities(), 0.0), degree(p.num_communities(), 0.0);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    degree[p.label(v)] += static_cast<double>(g.degree(v));
    for (auto w : g.neighbors(v)) {
      if (v < w && p.label(w) == p.label(v)) inside[p.label(v)] += 1.0;
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < p.num_communities(); ++c) {
    const double frac = degree[c] / (2.0 * m);
    q += inside[c] / m - resolution * frac * frac;
  }
  return q;
}

double map_equation(const UndirectedGraph& g, const Partition& p) {
  check_sizes(g, p);
  const double two_m = 2.0 * static_cast<double>(g.num_edges());
  const std::size_t nc = p.num_communities();
  std::vector<double> exit(nc, 0.0), flow(nc, 0.0);
  double node_term = 0.0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const double pv = static_cast<double>(g.degree(v)) / two_m;
    node_term += plogp(pv);
    flow[p.label(v)] += pv;
    for (auto w : g.neighbors(v)) {
      if (p.label(w) != p.label(v)) exit[p.label(v)] += 1.0 / two_m;
    }
  }
  double total_exit = 0.0, sum_exit = 0.0, sum_both = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    total_exit += exit[c];
    sum_exit += plogp(exit[c]);
    sum_both += plogp(exit[c] + flow[c]);
  }
  return plogp(total_exit) - 2.0 * sum_exit - node_term + sum_both;
}

std::vector<NodeId> visit_order(std::size_t num_nodes, std::uint64_t seed) {
  std::vector<NodeId> order(num_nodes);
  std::iota(order.begin(), order.end(), NodeId{0});
  Rng rng(substream_seed(seed, "visit-order"));
  rng.shuffle(order);
  return order;
}

Partition detect(Detector detector, const UndirectedGraph& g, const CommunityConfig& cfg,
                 std::span<const NodeId> order, DetectionTrace* trace) {
  cfg.validate();
  const std::size_t n = g.num_nodes();
  if (order.size() != n) throw ContractError("visit order must list every node once");
  {
    std::vector<char> hit(n, 0);
    for (auto v : order) {
      if (v >= n || hit[v]) throw ContractError("visit order is not a permutation");
      hit[v] = 1;
    }
  }
  if (trace) *trace = DetectionTrace{};
  if (g.num_edges() == 0) return Partition::singletons(n);

  Rng rng(substream_seed(cfg.seed, "levels"));
  WeightedGraph wg = from_graph(g, order);
  std::vector<std::uint32_t> internal;
  switch (detector) {
    case Detector::kLouvain:
      internal = multilevel(std::move(wg), identity(n), cfg, rng, trace,
                            [&](const WeightedGraph& level) {
                              return ModularityObjective(level, cfg.resolution);
                            });
      break;
    case Detector::kLeiden:
      internal = leiden_levels(std::move(wg), cfg, rng, trace);
      break;
    case Detector::kInfomap: {
      double node_plogp = 0.0;
      for (double s : wg.strength) node_plogp += plogp(s / (2.0 * wg.total));
      internal = infomap_search(wg, cfg, rng, trace, [&](const WeightedGraph& level) {
        return MapEquationObjective(level, node_plogp);
      });
      break;
    }
  }

  std::vector<std::uint32_t> labels(n);
  for (std::size_t k = 0; k < n; ++k) labels[order[k]] = internal[k];
  Partition result(labels);
  if (detector == Detector::kLeiden && !communities_connected(g, result)) {
    result = split_disconnected(g, result);
  }
  if (detector == Detector::kInfomap) {
    // Infomap keeps the one-module solution when no modular code beats it.
    auto one = Partition::whole(n);
    if (map_equation(g, one) < map_equation(g, result)) result = one;
  }
  return result;
}

Partition louvain(const UndirectedGraph& g, const CommunityConfig& cfg, DetectionTrace* trace) {
  return detect(Detector::kLouvain, g, cfg, visit_order(g.num_nodes(), cfg.seed), trace);
}

Partition leiden(const UndirectedGraph& g, const CommunityConfig& cfg, DetectionTrace* trace) {
  return detect(Detector::kLeiden, g, cfg, visit_order(g.num_nodes(), cfg.seed), trace);
}

Partition infomap_two_level(const UndirectedGraph& g, const CommunityConfig& cfg,
                            DetectionTrace* trace) {
  return detect(Detector::kInfomap, g, cfg, visit_order(g.num_nodes(), cfg.seed), trace);
}

bool communities_connected(const UndirectedGraph& g, const Partition& p) {
  return split_disconnected(g, p).num_communities() == p.num_communities();
}

void write_partition(const std::filesystem::path& path, const Partition& p) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  for (NodeId v = 0; v < p.num_nodes(); ++v) out << v << '\t' << p.label(v) << '\n';
}

Partition read_partition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open " + path.string());
  std::vector<std::uint32_t> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    try {
      if (tab == std::string::npos) throw std::invalid_argument("tab");
      if (std::stoull(line.substr(0, tab)) != labels.size()) throw std::invalid_argument("index");
      labels.push_back(static_cast<std::uint32_t>(std::stoul(line.substr(tab + 1))));
    } catch (const std::logic_error&) {
      throw ParseError(path.string(), line_no, "expected \"node_index<TAB>community_id\"");
    }
  }
  return Partition(labels);
}

}  // namespace tpscfo
