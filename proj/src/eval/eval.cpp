#include "retrorank/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "retrorank/numcore/errors.hpp"

namespace retrorank {

std::size_t RankedSet::positive_rank() const {
  auto it = std::find(order.begin(), order.end(), positive_index);
  if (it == order.end()) throw DimensionError("positive index missing from ranking");
  return static_cast<std::size_t>(it - order.begin()) + 1;
}

RankedSet rank_logits(std::vector<double> logits, std::size_t positive_index) {
  if (logits.empty()) throw DimensionError("rank_logits: no candidates");
  if (positive_index >= logits.size()) throw DimensionError("rank_logits: positive index out of range");
  for (double z : logits)
    if (!std::isfinite(z)) throw NumericError("rank_logits: non-finite logit");
  RankedSet out;
  out.positive_index = positive_index;
  out.order.resize(logits.size());
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return logits[a] > logits[b]; });
  out.logits = std::move(logits);
  return out;
}

RankedSet rank_candidates(const Scorer& scorer, const CandidateSet& set) {
  return rank_logits(scorer.candidate_logits(set.context, set.candidates), set.positive_index);
}

double recall_at_k(std::span<const RankedSet> ranked, std::size_t k) {
  if (ranked.empty()) throw ConfigError("recall_at_k: no ranked sets");
  if (k == 0) throw ConfigError("recall_at_k: k must be at least 1");
  std::size_t hits = 0;
  for (const RankedSet& r : ranked) {
    const std::size_t top = std::min(k, r.order.size());
    if (std::find(r.order.begin(), r.order.begin() + static_cast<long>(top), r.positive_index) !=
        r.order.begin() + static_cast<long>(top)) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(ranked.size());
}

EvalReport summarize(std::span<const RankedSet> ranked) {
  EvalReport report;
  report.recall_at_1 = recall_at_k(ranked, 1);
  report.recall_at_2 = recall_at_k(ranked, 2);
  report.recall_at_5 = recall_at_k(ranked, 5);
  report.num_sets = ranked.size();
  for (const RankedSet& r : ranked) report.positive_ranks.push_back(r.positive_rank());
  return report;
}

EvalReport evaluate(const Scorer& scorer, std::span<const CandidateSet> sets) {
  std::vector<RankedSet> ranked;
  ranked.reserve(sets.size());
  for (const CandidateSet& s : sets) ranked.push_back(rank_candidates(scorer, s));
  return summarize(ranked);
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["recall_at_1"] = report.recall_at_1;
  j["recall_at_2"] = report.recall_at_2;
  j["recall_at_5"] = report.recall_at_5;
  j["num_sets"] = report.num_sets;
  return j.dump();
}

void write_rank_tsv(std::ostream& out, const EvalReport& report) {
  out << "set_id\tpositive_rank\n";
  for (std::size_t i = 0; i < report.positive_ranks.size(); ++i) out << i << '\t' << report.positive_ranks[i] << '\n';
}

}  // namespace retrorank
