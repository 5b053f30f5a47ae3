#include "retrorank/transforms/transforms.hpp"

#include <algorithm>
#include <cstdlib>

#include "retrorank/numcore/errors.hpp"

namespace retrorank {

std::string_view transform_name(TransformKind kind) {
  switch (kind) {
    case TransformKind::Identity: return "identity";
    case TransformKind::PermuteLast: return "permute_last";
    case TransformKind::PermutePenult: return "permute_penult";
    case TransformKind::Flip: return "flip";
  }
  return "identity";
}

TransformKind parse_transform(std::string_view name) {
  if (name == "identity" || name == "none") return TransformKind::Identity;
  if (name == "permute_last" || name == "perm1") return TransformKind::PermuteLast;
  if (name == "permute_penult" || name == "perm2") return TransformKind::PermutePenult;
  if (name == "flip") return TransformKind::Flip;
  throw ConfigError("unknown transform '" + std::string(name) + "'");
}

std::string_view scope_name(FlipScope scope) {
  return scope == FlipScope::ContextOnly ? "context_only" : "context_and_response";
}

FlipScope parse_scope(std::string_view name) {
  if (name == "context_only") return FlipScope::ContextOnly;
  if (name == "context_and_response") return FlipScope::ContextAndResponse;
  throw ConfigError("unknown flip scope '" + std::string(name) + "'");
}

namespace {

std::vector<TransformKind> parse_list(std::string_view list) {
  std::vector<TransformKind> kinds{TransformKind::Identity};
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    std::string_view item = list.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      TransformKind k = parse_transform(item);
      if (k != TransformKind::Identity) kinds.push_back(k);
    }
    start = end + 1;
  }
  return kinds;
}

std::string list_string(const std::vector<TransformKind>& kinds) {
  std::string out;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (i) out += ',';
    out += transform_name(kinds[i]);
  }
  return out;
}

void validate_list(const std::vector<TransformKind>& kinds, const char* which) {
  if (kinds.empty() || kinds.front() != TransformKind::Identity) {
    throw ConfigError(std::string(which) + " transforms must start with identity");
  }
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    for (std::size_t j = i + 1; j < kinds.size(); ++j) {
      if (kinds[i] == kinds[j]) {
        throw ConfigError(std::string(which) + " transforms repeat '" + std::string(transform_name(kinds[i])) + "'");
      }
    }
  }
}

}  // namespace

AugmentationPlan AugmentationPlan::parse(std::string_view context_list, std::string_view response_list) {
  AugmentationPlan plan{parse_list(context_list), parse_list(response_list)};
  plan.validate();
  return plan;
}

void AugmentationPlan::validate() const {
  validate_list(context_transforms, "context");
  validate_list(response_transforms, "response");
  for (TransformKind k : response_transforms) {
    if (k == TransformKind::PermuteLast || k == TransformKind::PermutePenult) {
      throw ConfigError("permutations apply to contexts only, not responses");
    }
  }
}

std::string AugmentationPlan::context_string() const { return list_string(context_transforms); }
std::string AugmentationPlan::response_string() const { return list_string(response_transforms); }

std::vector<TransformKind> effective_response_transforms(const AugmentationPlan& plan, FlipScope scope) {
  if (scope == FlipScope::ContextOnly) return {TransformKind::Identity};
  return plan.response_transforms;
}

std::vector<Message> permute_context(const std::vector<Message>& context, TransformKind kind) {
  std::vector<Message> out = context;
  const std::size_t n = out.size();
  if (kind == TransformKind::PermuteLast && n >= 2) {
    std::swap(out[n - 1], out[n - 2]);
  } else if (kind == TransformKind::PermutePenult && n >= 3) {
    std::swap(out[n - 2], out[n - 3]);
  }
  return out;
}

std::size_t flip_break(const TokenList& tokens, const PunctuationSet& punctuation) {
  const std::size_t n = tokens.size();
  if (n <= 1) return 0;
  // Compare |boundary - n/2| as |2*boundary - n| to stay in integers.
  std::size_t best = n / 2;
  long best_dist = -1;
  for (std::size_t p = 0; p + 1 < n; ++p) {
    if (!punctuation.count(tokens[p])) continue;
    const std::size_t boundary = p + 1;
    const long dist = std::labs(2 * static_cast<long>(boundary) - static_cast<long>(n));
    if (best_dist < 0 || dist < best_dist) {
      best = boundary;
      best_dist = dist;
    }
  }
  return best;
}

TokenList flip_utterance(const TokenList& tokens, const PunctuationSet& punctuation) {
  if (tokens.size() <= 1) return tokens;
  const std::size_t cut = flip_break(tokens, punctuation);
  TokenList out;
  out.reserve(tokens.size());
  out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(cut), tokens.end());
  out.insert(out.end(), tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(cut));
  return out;
}

std::vector<Message> transform_context(const std::vector<Message>& context, TransformKind kind,
                                       const PunctuationSet& punctuation) {
  switch (kind) {
    case TransformKind::Identity: return context;
    case TransformKind::PermuteLast:
    case TransformKind::PermutePenult: return permute_context(context, kind);
    case TransformKind::Flip: {
      std::vector<Message> out = context;
      for (auto& m : out) m.tokens = flip_utterance(m.tokens, punctuation);
      return out;
    }
  }
  return context;
}

TokenList transform_response(const TokenList& response, TransformKind kind, const PunctuationSet& punctuation) {
  switch (kind) {
    case TransformKind::Identity: return response;
    case TransformKind::Flip: return flip_utterance(response, punctuation);
    default: throw ConfigError("permutations apply to contexts only, not responses");
  }
}

std::vector<TransformedExample> apply_plan(const Example& example, const AugmentationPlan& plan, FlipScope scope,
                                           const PunctuationSet& punctuation) {
  plan.validate();
  const auto responses = effective_response_transforms(plan, scope);
  std::vector<TransformedExample> out;
  out.reserve(plan.context_transforms.size() * responses.size());
  for (std::size_t i = 0; i < plan.context_transforms.size(); ++i) {
    const auto ctx = transform_context(example.context, plan.context_transforms[i], punctuation);
    for (std::size_t j = 0; j < responses.size(); ++j) {
      Example ex;
      ex.context = ctx;
      ex.response = transform_response(example.response, responses[j], punctuation);
      ex.label = example.label;
      out.push_back({i, j, std::move(ex)});
    }
  }
  return out;
}

}  // namespace retrorank
