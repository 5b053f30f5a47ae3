#include "retrorank/corpus/tokenize.hpp"

#include <cstdint>

namespace retrorank {
namespace {

// Length of the UTF-8 sequence starting at byte `c`; malformed leads count as 1.
std::size_t utf8_length(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xE) return 3;
  if ((c >> 3) == 0x1E) return 4;
  return 1;
}

char32_t decode(std::string_view s) {
  const auto b = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  switch (s.size()) {
    case 2: return ((b(0) & 0x1F) << 6) | (b(1) & 0x3F);
    case 3: return ((b(0) & 0x0F) << 12) | ((b(1) & 0x3F) << 6) | (b(2) & 0x3F);
    case 4: return ((b(0) & 0x07) << 18) | ((b(1) & 0x3F) << 12) | ((b(2) & 0x3F) << 6) | (b(3) & 0x3F);
    default: return b(0);
  }
}

bool is_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) || (c >= 0xF900 && c <= 0xFAFF) ||
         (c >= 0x3040 && c <= 0x30FF) || (c >= 0xAC00 && c <= 0xD7AF) || (c >= 0x20000 && c <= 0x2FA1F);
}

// Splits text into UTF-8 characters, never cutting a truncated sequence past
// the end of the input.
template <typename F>
void for_each_char(std::string_view text, F&& f) {
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t n = utf8_length(static_cast<unsigned char>(text[i]));
    if (i + n > text.size()) n = 1;
    f(text.substr(i, n));
    i += n;
  }
}

}  // namespace

const PunctuationSet& default_punctuation() {
  static const PunctuationSet set{".", ",", "!", "?", ";", ":", "。", "，", "！", "？", "；", "："};
  return set;
}

PunctuationSet parse_punctuation(std::string_view chars) {
  PunctuationSet out;
  for_each_char(chars, [&](std::string_view ch) {
    if (!is_space(decode(ch))) out.emplace(ch);
  });
  return out;
}

TokenList tokenize(std::string_view text, const TokenizerOptions& options) {
  TokenList tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for_each_char(text, [&](std::string_view ch) {
    const char32_t cp = decode(ch);
    if (is_space(cp)) {
      flush();
    } else if (options.punctuation.count(std::string(ch)) || (options.per_character_cjk && is_cjk(cp))) {
      flush();
      tokens.emplace_back(ch);
    } else {
      current.append(ch);
    }
  });
  flush();
  return tokens;
}

std::string join_tokens(const TokenList& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace retrorank
