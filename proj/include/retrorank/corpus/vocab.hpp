#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "retrorank/corpus/types.hpp"

namespace retrorank {

class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  // Turn separator for flat context encoders.
  static constexpr int kEou = 2;
  static constexpr const char* kPadToken = "<pad>";
  static constexpr const char* kUnkToken = "<unk>";
  static constexpr const char* kEouToken = "<eou>";

  Vocab();

  // Every token seen at least `min_count` times in contexts and responses,
  // most frequent first (ties broken lexicographically).
  static Vocab build(const std::vector<Example>& examples, std::size_t min_count = 2);
  // Rebuilds a vocabulary from its full id-ordered token list (reserved
  // entries included), as stored in checkpoints.
  static Vocab from_tokens(std::vector<std::string> tokens);

  int id(const std::string& token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  bool contains(const std::string& token) const { return ids_.count(token) != 0; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t min_count() const { return min_count_; }

  std::vector<int> encode(const TokenList& tokens) const;

 private:
  void add(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  std::size_t min_count_ = 1;
};

}  // namespace retrorank
