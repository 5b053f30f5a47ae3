#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "retrorank/corpus/tokenize.hpp"
#include "retrorank/corpus/types.hpp"

namespace retrorank {

enum class TransformKind { Identity, PermuteLast, PermutePenult, Flip };

std::string_view transform_name(TransformKind kind);
// Accepts identity, permute_last (perm1), permute_penult (perm2), flip.
TransformKind parse_transform(std::string_view name);

enum class FlipScope { ContextOnly, ContextAndResponse };

std::string_view scope_name(FlipScope scope);
FlipScope parse_scope(std::string_view name);

// Transform lists indexed by i (context) and j (response). Index 0 is always
// Identity, no kind repeats, and responses admit only Identity and Flip.
struct AugmentationPlan {
  std::vector<TransformKind> context_transforms{TransformKind::Identity};
  std::vector<TransformKind> response_transforms{TransformKind::Identity};

  static AugmentationPlan identity() { return {}; }
  // Comma-separated names; Identity is prepended when absent.
  static AugmentationPlan parse(std::string_view context_list, std::string_view response_list);

  void validate() const;
  bool is_identity() const { return context_transforms.size() == 1 && response_transforms.size() == 1; }
  std::string context_string() const;
  std::string response_string() const;

  friend bool operator==(const AugmentationPlan&, const AugmentationPlan&) = default;
};

// Response transforms actually used under `scope`: [Identity] for ContextOnly.
std::vector<TransformKind> effective_response_transforms(const AugmentationPlan& plan, FlipScope scope);

// PermuteLast swaps the last two messages, PermutePenult the second and third
// from the end. Contexts too short for the swap come back unchanged.
std::vector<Message> permute_context(const std::vector<Message>& context, TransformKind kind);

// Boundary (token index) at which flip_utterance cuts `tokens`.
std::size_t flip_break(const TokenList& tokens, const PunctuationSet& punctuation);
// Cuts after the punctuation token nearest the middle (final-token punctuation
// excluded, ties to the left), or at floor(n/2) without one, and swaps halves.
TokenList flip_utterance(const TokenList& tokens, const PunctuationSet& punctuation = default_punctuation());

std::vector<Message> transform_context(const std::vector<Message>& context, TransformKind kind,
                                       const PunctuationSet& punctuation = default_punctuation());
TokenList transform_response(const TokenList& response, TransformKind kind,
                             const PunctuationSet& punctuation = default_punctuation());

struct TransformedExample {
  std::size_t context_index = 0;
  std::size_t response_index = 0;
  Example example;
};

// Cartesian product of context and (effective) response transforms, (0,0)
// first, context index major.
std::vector<TransformedExample> apply_plan(const Example& example, const AugmentationPlan& plan, FlipScope scope,
                                           const PunctuationSet& punctuation = default_punctuation());

}  // namespace retrorank
