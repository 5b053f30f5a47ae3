#include "retrorank/corpus/vocab.hpp"

#include <algorithm>
#include <map>

#include "retrorank/numcore/errors.hpp"

namespace retrorank {

Vocab::Vocab() {
  add(kPadToken);
  add(kUnkToken);
  add(kEouToken);
}

void Vocab::add(const std::string& token) {
  if (ids_.count(token)) return;
  ids_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

Vocab Vocab::build(const std::vector<Example>& examples, std::size_t min_count) {
  if (min_count == 0) throw ConfigError("min_count must be positive");
  std::map<std::string, std::size_t> counts;
  for (const auto& ex : examples) {
    for (const auto& m : ex.context)
      for (const auto& t : m.tokens) ++counts[t];
    for (const auto& t : ex.response) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= min_count) kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  v.min_count_ = min_count;
  for (const auto& [tok, n] : kept) v.add(tok);
  return v;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 3 || tokens[kPad] != kPadToken || tokens[kUnk] != kUnkToken || tokens[kEou] != kEouToken) {
    throw Error("vocabulary token list lacks the reserved entries");
  }
  Vocab v;
  for (std::size_t i = 3; i < tokens.size(); ++i) {
    if (v.ids_.count(tokens[i])) throw Error("duplicate vocabulary token '" + tokens[i] + "'");
    v.add(tokens[i]);
  }
  return v;
}

int Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> Vocab::encode(const TokenList& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

}  // namespace retrorank
