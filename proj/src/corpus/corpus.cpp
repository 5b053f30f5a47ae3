#include "retrorank/corpus/corpus.hpp"

#include <fstream>
#include <sstream>

#include "retrorank/numcore/errors.hpp"

namespace retrorank {
namespace {

using nlohmann::json;

Example parse_line(const std::string& line, const std::string& source, std::size_t lineno,
                   const CorpusOptions& options) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(source, lineno, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(source, lineno, "expected a JSON object");
  if (!obj.contains("context") || !obj["context"].is_array()) {
    throw ParseError(source, lineno, "missing or non-array \"context\" field");
  }
  if (!obj.contains("response") || !obj["response"].is_string()) {
    throw ParseError(source, lineno, "missing or non-string \"response\" field");
  }
  Example ex;
  for (const json& m : obj["context"]) {
    if (!m.is_object() || !m.contains("text") || !m["text"].is_string()) {
      throw ParseError(source, lineno, "context entries must be objects with a string \"text\"");
    }
    Message msg;
    if (m.contains("speaker")) {
      if (!m["speaker"].is_string()) throw ParseError(source, lineno, "\"speaker\" must be a string");
      msg.speaker = m["speaker"].get<std::string>();
    }
    msg.tokens = tokenize(m["text"].get<std::string>(), options.tokenizer);
    if (!msg.tokens.empty()) ex.context.push_back(std::move(msg));
  }
  if (ex.context.empty()) throw ParseError(source, lineno, "context has no non-empty messages");
  ex.response = tokenize(obj["response"].get<std::string>(), options.tokenizer);
  if (ex.response.empty()) throw ParseError(source, lineno, "response is empty");
  if (obj.contains("label")) {
    const json& l = obj["label"];
    if (!l.is_number_integer() || (l.get<int>() != 0 && l.get<int>() != 1)) {
      throw ParseError(source, lineno, "\"label\" must be 0 or 1");
    }
    ex.label = l.get<int>();
  }
  truncate_example(ex, options);
  return ex;
}

}  // namespace

void truncate_example(Example& example, const CorpusOptions& options) {
  auto& ctx = example.context;
  if (options.max_context_turns > 0 && ctx.size() > options.max_context_turns) {
    ctx.erase(ctx.begin(), ctx.end() - static_cast<std::ptrdiff_t>(options.max_context_turns));
  }
  const std::size_t cap = options.max_tokens_per_message;
  if (cap == 0) return;
  for (auto& m : ctx) {
    if (m.tokens.size() > cap) m.tokens.resize(cap);
  }
  if (example.response.size() > cap) example.response.resize(cap);
}

std::vector<Example> parse_corpus(std::istream& in, const std::string& source, const CorpusOptions& options) {
  std::vector<Example> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_line(line, source, lineno, options));
  }
  return out;
}

std::vector<Example> load_corpus(const std::filesystem::path& path, const CorpusOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path.string());
  return parse_corpus(in, path.string(), options);
}

nlohmann::json example_to_json(const Example& example) {
  json ctx = json::array();
  for (const auto& m : example.context) ctx.push_back({{"speaker", m.speaker}, {"text", join_tokens(m.tokens)}});
  return json{{"context", std::move(ctx)}, {"response", join_tokens(example.response)}, {"label", example.label}};
}

void save_corpus(std::ostream& out, const std::vector<Example>& examples) {
  for (const auto& ex : examples) out << example_to_json(ex).dump() << '\n';
}

void save_corpus(const std::filesystem::path& path, const std::vector<Example>& examples) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus file " + path.string());
  save_corpus(out, examples);
}

}  // namespace retrorank
