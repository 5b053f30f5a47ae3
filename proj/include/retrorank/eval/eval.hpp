#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "retrorank/corpus/types.hpp"
#include "retrorank/scoring/model.hpp"

namespace retrorank {

struct RankedSet {
  std::vector<double> logits;
  // Candidate indices by descending logit, ties by ascending index.
  std::vector<std::size_t> order;
  std::size_t positive_index = 0;

  // 1-based position of the positive in `order`.
  std::size_t positive_rank() const;
};

RankedSet rank_logits(std::vector<double> logits, std::size_t positive_index);
// Scores every candidate with the scorer's own plan, transforms included.
RankedSet rank_candidates(const Scorer& scorer, const CandidateSet& set);

// Fraction of sets whose positive is among the first k of `order`.
double recall_at_k(std::span<const RankedSet> ranked, std::size_t k);

struct EvalReport {
  double recall_at_1 = 0.0;
  double recall_at_2 = 0.0;
  double recall_at_5 = 0.0;
  std::size_t num_sets = 0;
  std::vector<std::size_t> positive_ranks;
};

EvalReport summarize(std::span<const RankedSet> ranked);
EvalReport evaluate(const Scorer& scorer, std::span<const CandidateSet> sets);

// {"recall_at_1": ..., "recall_at_2": ..., "recall_at_5": ..., "num_sets": ...}
std::string report_json(const EvalReport& report);
// "set_id<TAB>positive_rank" per line, with a header.
void write_rank_tsv(std::ostream& out, const EvalReport& report);

}  // namespace retrorank
