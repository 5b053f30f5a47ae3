#include "retrorank/corpus/sampling.hpp"

#include <algorithm>
#include <set>

#include "retrorank/numcore/errors.hpp"

namespace retrorank {

std::size_t sample_negative_index(std::span<const TokenList> pool, const ExcludeFn& exclude, Prng& rng) {
  if (pool.empty()) throw SamplingExhausted("negative sampling from an empty pool");
  for (std::size_t attempt = 0; attempt < pool.size(); ++attempt) {
    const auto i = static_cast<std::size_t>(rng.below(pool.size()));
    if (!exclude || !exclude(pool[i])) return i;
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!exclude || !exclude(pool[i])) eligible.push_back(i);
  }
  if (eligible.empty()) {
    throw SamplingExhausted("every one of " + std::to_string(pool.size()) + " pool entries is excluded");
  }
  return eligible[static_cast<std::size_t>(rng.below(eligible.size()))];
}

TokenList sample_negative(std::span<const TokenList> pool, const ExcludeFn& exclude, Prng& rng) {
  return pool[sample_negative_index(pool, exclude, rng)];
}

std::vector<TokenList> response_pool(const std::vector<Example>& examples) {
  std::vector<TokenList> pool;
  std::set<TokenList> seen;
  for (const auto& ex : examples) {
    if (seen.insert(ex.response).second) pool.push_back(ex.response);
  }
  return pool;
}

std::vector<CandidateSet> build_candidate_sets(const std::vector<Example>& examples, std::size_t k, Prng& rng) {
  if (k < 2) throw ConfigError("candidate sets need k >= 2, got " + std::to_string(k));
  const std::vector<TokenList> pool = response_pool(examples);
  std::vector<CandidateSet> sets;
  for (const auto& ex : examples) {
    if (ex.label != 1) continue;
    const std::size_t available = pool.size() - static_cast<std::size_t>(std::count(pool.begin(), pool.end(), ex.response));
    if (available < k - 1) {
      throw SamplingExhausted("insufficient distractors: need " + std::to_string(k - 1) + ", corpus has " +
                              std::to_string(available) + " distinct responses");
    }
    std::vector<TokenList> picked;
    for (std::size_t n = 0; n + 1 < k; ++n) {
      const std::size_t i = sample_negative_index(
          pool, [&](const TokenList& r) { return r == ex.response || std::find(picked.begin(), picked.end(), r) != picked.end(); },
          rng);
      picked.push_back(pool[i]);
    }
    CandidateSet set;
    set.context = ex.context;
    set.positive_index = static_cast<std::size_t>(rng.below(k));
    set.candidates = std::move(picked);
    set.candidates.insert(set.candidates.begin() + static_cast<std::ptrdiff_t>(set.positive_index), ex.response);
    sets.push_back(std::move(set));
  }
  return sets;
}

}  // namespace retrorank
