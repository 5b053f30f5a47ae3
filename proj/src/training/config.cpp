#include "retrorank/training/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "retrorank/numcore/errors.hpp"

namespace retrorank {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key) + " (expected true/false)");
}
}  // namespace

TrainingConfig TrainingConfig::defaults(ModelKind kind) {
  TrainingConfig c;
  c.model = ModelConfig::defaults(kind);
  c.plan = AugmentationPlan::parse("flip", kind == ModelKind::Smn ? "flip" : "");
  c.scope = kind == ModelKind::Smn ? FlipScope::ContextAndResponse : FlipScope::ContextOnly;
  return c;
}

void TrainingConfig::validate() const {
  model.validate();
  plan.validate();
  if (!(t >= 0.0)) throw ConfigError("t must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must be in [0, 1)");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (valid_candidates < 2) throw ConfigError("valid_candidates must be >= 2");
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  if (!(max_grad_norm >= 0.0)) throw ConfigError("max_grad_norm must be >= 0");
}

PunctuationSet TrainingConfig::punctuation_set() const {
  return punctuation.empty() ? default_punctuation() : parse_punctuation(punctuation);
}

CorpusOptions TrainingConfig::corpus_options() const {
  CorpusOptions o;
  o.max_context_turns = max_context_turns;
  o.max_tokens_per_message = max_tokens_per_message;
  o.tokenizer.punctuation = punctuation_set();
  return o;
}

void apply_config_line(TrainingConfig& c, std::string_view key, std::string_view value) {
  auto size = [&] { return parse_number<std::size_t>(key, value); };
  auto real = [&] { return parse_number<double>(key, value); };
  if (key == "model_kind") {
    TrainingConfig fresh = TrainingConfig::defaults(parse_model_kind(value));
    c.model = fresh.model;
    c.plan = fresh.plan;
    c.scope = fresh.scope;
  } else if (key == "embed_dim") {
    c.model.embed_dim = size();
  } else if (key == "hidden_dim") {
    c.model.hidden_dim = size();
  } else if (key == "feature_dim") {
    c.model.feature_dim = size();
  } else if (key == "accum_dim") {
    c.model.accum_dim = size();
  } else if (key == "filters") {
    c.model.filters = size();
  } else if (key == "max_len") {
    c.model.max_len = size();
  } else if (key == "ctx_transforms") {
    c.plan = AugmentationPlan::parse(value, c.plan.response_string());
  } else if (key == "resp_transforms") {
    c.plan = AugmentationPlan::parse(c.plan.context_string(), value);
  } else if (key == "flip_scope") {
    c.scope = parse_scope(value);
  } else if (key == "punctuation") {
    c.punctuation = std::string(value);
  } else if (key == "t") {
    c.t = real();
  } else if (key == "learning_rate") {
    c.learning_rate = real();
  } else if (key == "dropout_rate") {
    c.dropout_rate = real();
  } else if (key == "max_epochs") {
    c.max_epochs = size();
  } else if (key == "patience") {
    c.patience = size();
  } else if (key == "batch_size") {
    c.batch_size = size();
  } else if (key == "max_steps") {
    c.max_steps = size();
  } else if (key == "max_grad_norm") {
    c.max_grad_norm = real();
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "base_model") {
    c.base_model = parse_bool(key, value);
  } else if (key == "min_count") {
    c.min_count = size();
  } else if (key == "valid_candidates") {
    c.valid_candidates = size();
  } else if (key == "max_context_turns") {
    c.max_context_turns = size();
  } else if (key == "max_tokens_per_message") {
    c.max_tokens_per_message = size();
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

TrainingConfig parse_config(std::istream& in, const std::string& source, TrainingConfig base) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, number, "expected key = value");
    try {
      apply_config_line(base, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(source, number, e.what());
    }
  }
  base.validate();
  return base;
}

TrainingConfig load_config(const std::filesystem::path& path, TrainingConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  return parse_config(in, path.string(), std::move(base));
}

std::string config_to_string(const TrainingConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "model_kind = " << model_kind_name(c.model.kind) << '\n'
      << "embed_dim = " << c.model.embed_dim << '\n'
      << "hidden_dim = " << c.model.hidden_dim << '\n'
      << "feature_dim = " << c.model.feature_dim << '\n'
      << "accum_dim = " << c.model.accum_dim << '\n'
      << "filters = " << c.model.filters << '\n'
      << "max_len = " << c.model.max_len << '\n'
      << "ctx_transforms = " << c.plan.context_string() << '\n'
      << "resp_transforms = " << c.plan.response_string() << '\n'
      << "flip_scope = " << scope_name(c.scope) << '\n';
  if (!c.punctuation.empty()) out << "punctuation = " << c.punctuation << '\n';
  out << "t = " << c.t << '\n'
      << "learning_rate = " << c.learning_rate << '\n'
      << "dropout_rate = " << c.dropout_rate << '\n'
      << "max_epochs = " << c.max_epochs << '\n'
      << "patience = " << c.patience << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "max_steps = " << c.max_steps << '\n'
      << "max_grad_norm = " << c.max_grad_norm << '\n'
      << "seed = " << c.seed << '\n'
      << "base_model = " << (c.base_model ? "true" : "false") << '\n'
      << "min_count = " << c.min_count << '\n'
      << "valid_candidates = " << c.valid_candidates << '\n'
      << "max_context_turns = " << c.max_context_turns << '\n'
      << "max_tokens_per_message = " << c.max_tokens_per_message << '\n';
  return out.str();
}

}  // namespace retrorank
