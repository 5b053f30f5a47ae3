#include <algorithm>

#include "doctest.h"
#include "retrorank/corpus/tokenize.hpp"
#include "retrorank/numcore/errors.hpp"
#include "retrorank/numcore/prng.hpp"
#include "retrorank/transforms/transforms.hpp"

using namespace retrorank;

namespace {

Message msg(std::string speaker, std::string text) { return {std::move(speaker), tokenize(text)}; }

const TokenList kFramesFirst{"Sorry", "I",    "cannot", "find",   "any",    "trips",     "leaving",
                             "from",  "Gotham", "City", ".",      "Could",  "you",       "suggest",
                             "another", "nearby", "departure", "city", "?"};

}  // namespace

TEST_CASE("permute_context reproduces the Taobao reordering") {
  std::vector<Message> ctx{msg("Customer", "在 吗"), msg("Customer", "看看 此 款"), msg("Agent", "在的 亲")};
  auto out = permute_context(ctx, TransformKind::PermuteLast);
  CHECK(out == std::vector<Message>{msg("Customer", "在 吗"), msg("Agent", "在的 亲"), msg("Customer", "看看 此 款")});
  CHECK(permute_context(out, TransformKind::PermuteLast) == ctx);

  std::vector<Message> single{msg("A", "hello")};
  CHECK(permute_context(single, TransformKind::PermuteLast) == single);
  CHECK(permute_context(single, TransformKind::PermutePenult) == single);
  std::vector<Message> pair{msg("A", "x"), msg("B", "y")};
  CHECK(permute_context(pair, TransformKind::PermutePenult) == pair);

  std::vector<Message> four{msg("A", "1"), msg("B", "2"), msg("C", "3"), msg("D", "4")};
  auto p2 = permute_context(four, TransformKind::PermutePenult);
  CHECK(p2 == std::vector<Message>{msg("A", "1"), msg("C", "3"), msg("B", "2"), msg("D", "4")});
}

TEST_CASE("flip_utterance examples") {
  TokenList want{"Could", "you",    "suggest", "another", "nearby", "departure", "city", "?",      "Sorry", "I",
                 "cannot", "find", "any",     "trips",   "leaving", "from",      "Gotham", "City", "."};
  CHECK(flip_utterance(kFramesFirst) == want);
  CHECK(flip_utterance({"hi"}) == TokenList{"hi"});
  CHECK(flip_utterance({}).empty());
  CHECK(flip_utterance({"a", "b", "c", "d"}) == TokenList{"c", "d", "a", "b"});
  CHECK(flip_utterance({"a", "b", "c"}) == TokenList{"b", "c", "a"});
  // final punctuation is not a break candidate
  CHECK(flip_utterance({"a", "b", "c", "?"}) == TokenList{"c", "?", "a", "b"});
  // equidistant punctuation: leftmost wins (boundaries 2 and 4 around n/2 = 3)
  CHECK(flip_break({"a", ",", "b", ",", "c", "d"}, default_punctuation()) == 2);
  // punctuation closest to the middle wins over the midpoint
  CHECK(flip_utterance({"a", ",", "b", "c", "d", "e"}) == TokenList{"b", "c", "d", "e", "a", ","});
}

TEST_CASE("flip keeps the Frames conditional sentence multiset") {
  TokenList second = tokenize("Would any packages to Mos Eisley be available, if I increase my budget to $2500?");
  TokenList out = flip_utterance(second);
  CHECK(out != second);
  auto a = second, b = out;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
  CHECK(out.front() == "if");
}

TEST_CASE("plan parsing and validation") {
  auto plan = AugmentationPlan::parse("flip", "identity,flip");
  CHECK(plan.context_transforms == std::vector<TransformKind>{TransformKind::Identity, TransformKind::Flip});
  CHECK(plan.response_string() == "identity,flip");
  CHECK(AugmentationPlan::parse("perm1,perm2", "").context_string() == "identity,permute_last,permute_penult");
  CHECK_THROWS_AS(AugmentationPlan::parse("flip,flip", ""), ConfigError);
  CHECK_THROWS_AS(AugmentationPlan::parse("", "permute_last"), ConfigError);
  CHECK_THROWS_AS(AugmentationPlan::parse("shuffle", ""), ConfigError);
  AugmentationPlan bad{{TransformKind::Flip}, {TransformKind::Identity}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("apply_plan") {
  Example ex{{msg("A", "one , two three"), msg("B", "four five"), msg("A", "six . seven")}, tokenize("ok , sure then"), 0};

  auto id = apply_plan(ex, AugmentationPlan::identity(), FlipScope::ContextAndResponse);
  REQUIRE(id.size() == 1);
  CHECK(id[0].context_index == 0);
  CHECK(id[0].example == ex);

  auto plan = AugmentationPlan::parse("flip", "flip");
  auto both = apply_plan(ex, plan, FlipScope::ContextAndResponse);
  CHECK(both.size() == 4);
  CHECK(both[3].example.response == flip_utterance(ex.response));
  CHECK(both[2].example.context[0].tokens == flip_utterance(ex.context[0].tokens));
  CHECK(both[2].example.response == ex.response);
  CHECK(apply_plan(ex, plan, FlipScope::ContextOnly).size() == 2);

  auto perm = apply_plan(ex, AugmentationPlan::parse("permute_last", ""), FlipScope::ContextOnly);
  REQUIRE(perm.size() == 2);
  CHECK(perm[1].context_index == 1);
  CHECK(perm[1].example.context[1] == ex.context[2]);
  CHECK(perm[1].example.context[2] == ex.context[1]);
  CHECK(perm[1].example.response == ex.response);
  CHECK(perm[1].example.label == 0);
}

TEST_CASE("transform properties over random inputs") {
  Prng rng(2024);
  const std::vector<std::string> words{"a", "b", "c", ".", ",", "?", "d", "e"};
  for (int trial = 0; trial < 2000; ++trial) {
    TokenList toks;
    const auto n = rng.below(9);
    for (std::uint64_t i = 0; i < n; ++i) toks.push_back(words[rng.below(words.size())]);
    TokenList flipped = flip_utterance(toks);
    CHECK(flipped.size() == toks.size());
    auto a = toks, b = flipped;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    const std::size_t cut = flip_break(toks, default_punctuation());
    const bool should_differ = toks.size() >= 2 && cut != 0 && cut != toks.size();
    // a rotation can coincide with the input only for periodic sequences
    if (!should_differ) CHECK(flipped == toks);

    std::vector<Message> ctx;
    const auto turns = rng.below(5);
    for (std::uint64_t t = 0; t < turns; ++t) ctx.push_back({"s" + std::to_string(t), {words[rng.below(words.size())]}});
    for (auto kind : {TransformKind::PermuteLast, TransformKind::PermutePenult}) {
      auto once = permute_context(ctx, kind);
      CHECK(permute_context(once, kind) == ctx);
      std::vector<std::string> sp_before, sp_after;
      for (auto& m : ctx) sp_before.push_back(m.speaker);
      for (auto& m : once) sp_after.push_back(m.speaker);
      std::sort(sp_before.begin(), sp_before.end());
      std::sort(sp_after.begin(), sp_after.end());
      CHECK(sp_before == sp_after);
    }
  }
}
