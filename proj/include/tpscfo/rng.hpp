#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace tpscfo {

// Portable seeded generator (xoshiro256**). The standard distributions are
// implementation-defined, so every draw the pipeline makes goes through the
// helpers below to keep runs reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  // Uniform in [0, n); n must be > 0. Unbiased (Lemire's method).
  std::uint64_t uniform_index(std::uint64_t n);
  // Uniform in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  bool bernoulli(double p) { return uniform01() < p; }
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t fnv1a64(std::string_view bytes);

// Seed of a named sub-stream ("split", "als", "leiden", ...) of a global
// seed. Changing one stage never perturbs another stage's draws.
std::uint64_t substream_seed(std::uint64_t global_seed, std::string_view name);

}  // namespace tpscfo
