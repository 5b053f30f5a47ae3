#pragma once

#include <string>
#include <string_view>
#include <unordered_set>

#include "retrorank/corpus/types.hpp"

namespace retrorank {

using PunctuationSet = std::unordered_set<std::string>;

// . , ! ? ; : and their full-width CJK forms.
const PunctuationSet& default_punctuation();
// Parses a comma-free override such as ".?!" or "。？" into single-character
// entries (each UTF-8 character becomes one punctuation mark).
PunctuationSet parse_punctuation(std::string_view chars);

struct TokenizerOptions {
  PunctuationSet punctuation = default_punctuation();
  // Split Han/kana/hangul runs into one token per character.
  bool per_character_cjk = false;
};

// Splits on Unicode whitespace, detaches every punctuation character into its
// own token, and optionally splits CJK text per character.
TokenList tokenize(std::string_view text, const TokenizerOptions& options = {});

std::string join_tokens(const TokenList& tokens);

}  // namespace retrorank
