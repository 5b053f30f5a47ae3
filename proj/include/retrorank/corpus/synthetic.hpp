#pragma once

#include <cstdint>
#include <vector>

#include "retrorank/corpus/types.hpp"

namespace retrorank {

// Seeded template grammar for desk-scale runs. Each dialog mentions a key
// token and a modifier token in one "deciding" context message; the true
// response is fixed by the key alone, so the modifier and the other messages
// are noise.
struct SyntheticOptions {
  std::size_t num_pairs = 200;
  std::uint64_t seed = 2018;
  std::size_t num_keys = 20;
  std::size_t num_modifiers = 10;
  // Probability that the deciding message is the penultimate turn, followed
  // by a filler turn, instead of being the last turn.
  double penultimate_rate = 0.0;
  // Walk all key x modifier combinations (shuffled) before repeating any.
  bool cover_combinations = true;
};

std::vector<Example> generate_synthetic(const SyntheticOptions& options);

}  // namespace retrorank
