#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tpscfo/community.hpp"
#include "tpscfo/dataio.hpp"
#include "tpscfo/graph.hpp"
#include "tpscfo/rng.hpp"

namespace testing {

namespace fs = std::filesystem;

// Fresh empty directory under the build tree.
inline fs::path scratch_dir(const std::string& name) {
  fs::path dir = fs::path(TPSCFO_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Runs the CLI with `args`; returns the exit status.
inline int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + TPSCFO_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

inline tpscfo::UndirectedGraph make_graph(std::size_t n,
                                          std::vector<std::pair<tpscfo::NodeId, tpscfo::NodeId>> edges) {
  return tpscfo::UndirectedGraph(n, std::move(edges));
}

inline tpscfo::UndirectedGraph two_triangles() {
  return make_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
}

// Two disjoint 4-cycles: 0-1-2-3-0 and 4-5-6-7-4.
inline tpscfo::UndirectedGraph two_squares() {
  return make_graph(8, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {4, 5}, {5, 6}, {6, 7}, {4, 7}});
}

// Erdos-Renyi graph with edge probability p, resampled until connected.
inline tpscfo::UndirectedGraph random_connected_graph(std::size_t n, double p, tpscfo::Rng& rng) {
  for (;;) {
    std::vector<std::pair<tpscfo::NodeId, tpscfo::NodeId>> edges;
    for (tpscfo::NodeId a = 0; a < n; ++a) {
      for (tpscfo::NodeId b = a + 1; b < n; ++b) {
        if (rng.bernoulli(p)) edges.emplace_back(a, b);
      }
    }
    tpscfo::UndirectedGraph g(n, edges);
    std::vector<int> seen(n, 0);
    std::vector<tpscfo::NodeId> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (auto w : g.neighbors(v)) {
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
      }
    }
    if (count == n) return g;
  }
}

// Calls f on every set partition of n nodes (restricted growth strings).
inline void for_each_partition(std::size_t n, const std::function<void(const tpscfo::Partition&)>& f) {
  std::vector<std::uint32_t> labels(n, 0);
  std::function<void(std::size_t, std::uint32_t)> rec = [&](std::size_t v, std::uint32_t next) {
    if (v == n) {
      f(tpscfo::Partition(labels));
      return;
    }
    for (std::uint32_t c = 0; c <= next; ++c) {
      labels[v] = c;
      rec(v + 1, c == next ? next + 1 : next);
    }
  };
  rec(0, 0);
}

// Same node grouping, regardless of label names.
inline bool same_grouping(const tpscfo::Partition& a, const tpscfo::Partition& b) {
  return a == b;  // labels are canonical
}

inline bool is_valid_partition(const tpscfo::Partition& p) {
  std::vector<int> used(p.num_communities(), 0);
  for (tpscfo::NodeId v = 0; v < p.num_nodes(); ++v) {
    if (p.label(v) >= p.num_communities()) return false;
    used[p.label(v)] = 1;
  }
  for (int u : used) {
    if (!u) return false;
  }
  return true;
}

}  // namespace testing
