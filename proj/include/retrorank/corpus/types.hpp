#pragma once

#include <string>
#include <vector>

namespace retrorank {

using TokenList = std::vector<std::string>;

struct Message {
  std::string speaker;
  TokenList tokens;

  friend bool operator==(const Message&, const Message&) = default;
};

// One context (oldest message first), a candidate response and its label.
struct Example {
  std::vector<Message> context;
  TokenList response;
  int label = 1;

  friend bool operator==(const Example&, const Example&) = default;
};

struct CandidateSet {
  std::vector<Message> context;
  std::vector<TokenList> candidates;
  std::size_t positive_index = 0;
};

}  // namespace retrorank
