#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "retrorank/corpus/sampling.hpp"
#include "retrorank/corpus/synthetic.hpp"
#include "retrorank/eval/eval.hpp"
#include "retrorank/numcore/errors.hpp"

using namespace retrorank;

namespace {

// Independent recount: the positive is in the top k when fewer than k
// candidates beat it, counting equal logits at lower indices as beating it.
bool brute_hit(const std::vector<double>& logits, std::size_t positive, std::size_t k) {
  std::size_t ahead = 0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (c == positive) continue;
    if (logits[c] > logits[positive] || (logits[c] == logits[positive] && c < positive)) ++ahead;
  }
  return ahead < k;
}

std::vector<RankedSet> random_sets(Prng& rng, std::size_t count) {
  std::vector<RankedSet> sets;
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t k = 1 + rng.below(10);
    std::vector<double> logits(k);
    // coarse values so ties are common
    for (double& z : logits) z = static_cast<double>(rng.below(5)) - 2.0;
    sets.push_back(rank_logits(logits, rng.below(k)));
  }
  return sets;
}

}  // namespace

TEST_CASE("rank_logits examples") {
  auto one = rank_logits({-3.0}, 0);
  CHECK(one.order == std::vector<std::size_t>{0});
  CHECK(one.positive_rank() == 1);
  CHECK(rank_logits({0.4, 0.4, 0.4, 0.4}, 2).order == std::vector<std::size_t>{0, 1, 2, 3});
  auto three = rank_logits({0.1, 2.0, -1.0}, 2);
  CHECK(three.order == std::vector<std::size_t>{1, 0, 2});
  CHECK(three.positive_rank() == 3);
  CHECK(rank_logits({1.0, 3.0, 3.0, 2.0}, 0).order == std::vector<std::size_t>{1, 2, 3, 0});
  CHECK_THROWS_AS(rank_logits({}, 0), DimensionError);
  CHECK_THROWS_AS(rank_logits({1.0}, 1), DimensionError);
  CHECK_THROWS_AS(rank_logits({1.0, NAN}, 0), NumericError);
}

TEST_CASE("recall_at_k examples") {
  const RankedSet hit = rank_logits({0.9, 0.2, 0.5}, 0);
  const RankedSet miss = rank_logits({0.1, 0.2, 0.5}, 0);
  CHECK(recall_at_k(std::span(&hit, 1), 1) == 1.0);
  CHECK(recall_at_k(std::span(&miss, 1), 1) == 0.0);
  const RankedSet both[] = {hit, miss};
  CHECK(recall_at_k(both, 1) == 0.5);
  CHECK(recall_at_k(both, 3) == 1.0);
  CHECK_THROWS_AS(recall_at_k({}, 1), ConfigError);
  CHECK_THROWS_AS(recall_at_k(both, 0), ConfigError);
}

TEST_CASE("recall_at_k equals a brute-force recount") {
  Prng rng(99);
  auto sets = random_sets(rng, 1000);
  for (std::size_t k = 1; k <= 10; ++k) {
    std::size_t hits = 0;
    for (const RankedSet& s : sets) hits += brute_hit(s.logits, s.positive_index, k) ? 1 : 0;
    CHECK(recall_at_k(sets, k) == static_cast<double>(hits) / 1000.0);
  }
}

TEST_CASE("recall_at_k properties") {
  Prng rng(5);
  auto sets = random_sets(rng, 300);
  double prev = 0.0;
  for (std::size_t k = 1; k <= 11; ++k) {
    const double r = recall_at_k(sets, k);
    CHECK(r >= prev);
    prev = r;
  }
  CHECK(prev == 1.0);
  for (const RankedSet& s : sets) {
    std::vector<double> moved;
    for (double z : s.logits) moved.push_back(std::exp(0.5 * z) * 3.0 - 7.0);
    CHECK(rank_logits(moved, s.positive_index).order == s.order);
  }
}

TEST_CASE("report formats") {
  EvalReport r;
  r.recall_at_1 = 0.5;
  r.recall_at_2 = 0.75;
  r.recall_at_5 = 1.0;
  r.num_sets = 4;
  r.positive_ranks = {1, 2, 3, 1};
  CHECK(report_json(r) == R"({"recall_at_1":0.5,"recall_at_2":0.75,"recall_at_5":1.0,"num_sets":4})");
  std::ostringstream tsv;
  write_rank_tsv(tsv, r);
  CHECK(tsv.str() == "set_id\tpositive_rank\n0\t1\n1\t2\n2\t3\n3\t1\n");
}

TEST_CASE("evaluate a frozen model") {
  SyntheticOptions so;
  so.num_pairs = 15;
  auto examples = generate_synthetic(so);
  ModelConfig cfg = ModelConfig::defaults(ModelKind::LstmDe);
  cfg.embed_dim = 6;
  cfg.hidden_dim = 6;
  Scorer scorer(cfg, AugmentationPlan::parse("flip", ""), FlipScope::ContextOnly, Vocab::build(examples, 1), 3);
  Prng rng(4);
  auto sets = build_candidate_sets(examples, 3, rng);
  const EvalReport a = evaluate(scorer, sets);
  const EvalReport b = evaluate(scorer, sets);
  CHECK(report_json(a) == report_json(b));
  CHECK(a.positive_ranks == b.positive_ranks);
  auto reversed = sets;
  std::reverse(reversed.begin(), reversed.end());
  const EvalReport c = evaluate(scorer, reversed);
  CHECK(report_json(c) == report_json(a));

  // ranking agrees with a sort of independently computed logits
  for (const CandidateSet& s : sets) {
    RankedSet ranked = rank_candidates(scorer, s);
    std::vector<std::pair<double, std::size_t>> oracle;
    for (std::size_t c = 0; c < s.candidates.size(); ++c)
      oracle.emplace_back(scorer.logit(scorer.prepare(s.context, s.candidates[c])), c);
    std::stable_sort(oracle.begin(), oracle.end(), [](auto& x, auto& y) { return x.first > y.first; });
    for (std::size_t pos = 0; pos < oracle.size(); ++pos) CHECK(ranked.order[pos] == oracle[pos].second);
  }
  CandidateSet single{examples[0].context, {examples[0].response}, 0};
  CHECK(rank_candidates(scorer, single).positive_rank() == 1);
}
