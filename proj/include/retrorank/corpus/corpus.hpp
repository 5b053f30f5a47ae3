#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "retrorank/corpus/tokenize.hpp"
#include "retrorank/corpus/types.hpp"

namespace retrorank {

struct CorpusOptions {
  std::size_t max_context_turns = 10;
  std::size_t max_tokens_per_message = 50;
  TokenizerOptions tokenizer;
};

// Reads the JSON Lines corpus format:
//   {"context": [{"speaker": "...", "text": "..."}, ...], "response": "...", "label": 0|1}
// "speaker" and "label" are optional (label defaults to 1). Blank lines are
// skipped. Throws ParseError naming the 1-based line on malformed input.
std::vector<Example> load_corpus(const std::filesystem::path& path, const CorpusOptions& options = {});
std::vector<Example> parse_corpus(std::istream& in, const std::string& source, const CorpusOptions& options = {});

// Truncation shared by loading and by callers that build Examples directly:
// keeps the most recent turns and the first tokens of every message.
void truncate_example(Example& example, const CorpusOptions& options);

nlohmann::json example_to_json(const Example& example);
void save_corpus(std::ostream& out, const std::vector<Example>& examples);
void save_corpus(const std::filesystem::path& path, const std::vector<Example>& examples);

}  // namespace retrorank
