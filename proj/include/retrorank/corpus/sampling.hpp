#pragma once

#include <functional>
#include <span>
#include <vector>

#include "retrorank/corpus/types.hpp"
#include "retrorank/numcore/prng.hpp"

namespace retrorank {

using ExcludeFn = std::function<bool(const TokenList&)>;

// Uniform draw among pool entries the predicate does not exclude. Rejection
// sampling for up to pool.size() attempts, then an exact scan of the eligible
// entries; throws SamplingExhausted when none are eligible.
std::size_t sample_negative_index(std::span<const TokenList> pool, const ExcludeFn& exclude, Prng& rng);
TokenList sample_negative(std::span<const TokenList> pool, const ExcludeFn& exclude, Prng& rng);

// Distinct responses across `examples`, in first-appearance order.
std::vector<TokenList> response_pool(const std::vector<Example>& examples);

// One candidate set per positive example: the true response plus k-1 distinct
// distractors drawn from the corpus responses, positive placed uniformly.
std::vector<CandidateSet> build_candidate_sets(const std::vector<Example>& examples, std::size_t k, Prng& rng);

}  // namespace retrorank
