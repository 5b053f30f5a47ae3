#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace retrorank {

// SplitMix64 (Steele, Lea & Flood, 2014). Each call advances the state by the
// golden-ratio increment 0x9e3779b97f4a7c15 and returns the mixed state:
//   z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//   z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//   return z ^ (z >> 31)
// Doubles use the top 53 bits. Sub-streams are seeded with the first output of
// a generator started at (seed ^ fnv1a64(tag)), so streams for different
// purposes never depend on each other's call order.
class Prng {
 public:
  explicit Prng(std::uint64_t seed = 0) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next();

  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n), unbiased (rejection). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  Prng substream(std::string_view tag) const;

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

std::uint64_t fnv1a64(std::string_view text);

}  // namespace retrorank
