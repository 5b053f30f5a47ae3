#include "retrorank/scoring/model.hpp"

#include <string>

#include "retrorank/numcore/errors.hpp"

namespace retrorank {

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::LstmDe: return "lstm_de";
    case ModelKind::HreDe: return "hre_de";
    case ModelKind::Smn: return "smn";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "lstm_de") return ModelKind::LstmDe;
  if (name == "hre_de") return ModelKind::HreDe;
  if (name == "smn") return ModelKind::Smn;
  throw ConfigError("unknown model kind '" + std::string(name) + "' (expected lstm_de, hre_de or smn)");
}

ModelConfig ModelConfig::defaults(ModelKind kind) {
  ModelConfig c;
  c.kind = kind;
  if (kind == ModelKind::Smn) {
    c.embed_dim = 200;
    c.hidden_dim = 200;
  }
  return c;
}

void ModelConfig::validate() const {
  if (embed_dim == 0 || hidden_dim == 0) throw ConfigError("embed_dim and hidden_dim must be positive");
  if (kind == ModelKind::Smn && (feature_dim == 0 || accum_dim == 0 || filters == 0 || max_len == 0)) {
    throw ConfigError("feature_dim, accum_dim, filters and max_len must be positive");
  }
}

Scorer::Scorer(ModelConfig config, AugmentationPlan plan, FlipScope scope, Vocab vocab, std::uint64_t init_seed,
               PunctuationSet punctuation)
    : config_(config),
      plan_(std::move(plan)),
      scope_(scope),
      vocab_(std::move(vocab)),
      punctuation_(std::move(punctuation)),
      init_seed_(init_seed) {
  config_.validate();
  plan_.validate();
  response_transforms_ = effective_response_transforms(plan_, scope_);
  Prng init = Prng(init_seed).substream("init");
  std::size_t rows = 0, cols = 0;
  if (config_.kind == ModelKind::Smn) {
    SmnDims d;
    d.vocab = vocab_.size();
    d.embed = config_.embed_dim;
    d.hidden = config_.hidden_dim;
    d.feature = config_.feature_dim;
    d.accum = config_.accum_dim;
    d.filters = config_.filters;
    d.max_len = config_.max_len;
    smn_.emplace(params_, d, init);
    rows = config_.accum_dim;
  } else {
    de_.emplace(params_, config_.kind == ModelKind::HreDe, vocab_.size(), config_.embed_dim, config_.hidden_dim, init);
    rows = de_->context_dim();
    cols = de_->response_dim();
  }
  for (const ViewPair& p : pairs()) {
    const std::string suffix = std::to_string(p.first) + "_" + std::to_string(p.second);
    Tensor init_value = smn_ ? Tensor(Shape{rows}, 0.0) : Tensor(Shape{rows, cols}, 0.0);
    for (double& v : init_value.data()) v = init.uniform(-0.05, 0.05);
    combiner_[p] = &params_.add((smn_ ? "combiner.w_" : "combiner.M_") + suffix, std::move(init_value));
  }
}

std::vector<ViewPair> Scorer::pairs() const {
  std::vector<ViewPair> out;
  for (std::size_t i = 0; i < num_context_views(); ++i)
    for (std::size_t j = 0; j < num_response_views(); ++j) out.emplace_back(i, j);
  return out;
}

void Scorer::set_embeddings(const Tensor& table) {
  Parameter& e = params_.get("embedding");
  if (table.shape() != e.value.shape()) {
    throw DimensionError("embedding table " + shape_string(table.shape()) + " does not match " +
                         shape_string(e.value.shape()));
  }
  e.value = table;
  for (std::size_t c = 0; c < table.dim(1); ++c) e.value.at(0, c) = 0.0;
}

ContextIds Scorer::encode_context_ids(const std::vector<Message>& context) const {
  ContextIds ids;
  ids.reserve(context.size());
  for (const Message& m : context) ids.push_back(vocab_.encode(m.tokens));
  return ids;
}

PreparedExample Scorer::prepare(const std::vector<Message>& context, const TokenList& response) const {
  PreparedExample out;
  for (TransformKind kind : plan_.context_transforms) {
    out.contexts.push_back(encode_context_ids(transform_context(context, kind, punctuation_)));
  }
  for (TransformKind kind : response_transforms_) {
    out.responses.push_back(vocab_.encode(transform_response(response, kind, punctuation_)));
  }
  return out;
}

std::map<ViewPair, ad::Var> Scorer::combiner_vars(ad::Tape& tape) const {
  std::map<ViewPair, ad::Var> out;
  for (const auto& [p, param] : combiner_) out.emplace(p, tape.param(*param));
  return out;
}

std::vector<std::vector<SmnEncoder::Utterance>> Scorer::smn_context(ad::Tape& tape, const std::vector<ContextIds>& views,
                                                                    const DropoutSpec& drop) const {
  std::vector<std::vector<SmnEncoder::Utterance>> out;
  for (const ContextIds& messages : views) {
    auto& encoded = out.emplace_back();
    for (const IdList& m : messages) encoded.push_back(smn_->encode_utterance(tape, m, drop));
  }
  return out;
}

ad::Var Scorer::smn_pair(ad::Tape& tape, const std::vector<SmnEncoder::Utterance>& messages,
                         const SmnEncoder::Utterance& response_t, const DropoutSpec& drop) const {
  if (messages.empty()) throw DimensionError("smn: empty context");
  std::vector<ad::Var> features;
  features.reserve(messages.size());
  for (const auto& m : messages) features.push_back(smn_->match(tape, m, response_t));
  return smn_->accumulate(tape, features, drop);
}

ForwardResult Scorer::forward(ad::Tape& tape, const PreparedExample& example, const DropoutSpec& drop) const {
  if (example.contexts.size() != num_context_views() || example.responses.size() != num_response_views()) {
    throw DimensionError("prepared example has " + std::to_string(example.contexts.size()) + "x" +
                         std::to_string(example.responses.size()) + " views, plan needs " +
                         std::to_string(num_context_views()) + "x" + std::to_string(num_response_views()));
  }
  ForwardResult out;
  if (de_) {
    for (const ContextIds& c : example.contexts) out.context_views.push_back(de_->encode_context(tape, c, drop));
    for (const IdList& r : example.responses) out.response_views.push_back(de_->encode_response(tape, r, drop));
    out.logit = combined_de_logit(out.context_views, out.response_views, combiner_vars(tape));
    return out;
  }
  auto contexts = smn_context(tape, example.contexts, drop);
  std::vector<SmnEncoder::Utterance> responses;
  for (const IdList& r : example.responses) {
    responses.push_back(smn_->transposed(smn_->encode_utterance(tape, r, drop)));
  }
  std::map<ViewPair, ad::Var> encodings;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    for (std::size_t j = 0; j < responses.size(); ++j) {
      ad::Var v = smn_pair(tape, contexts[i], responses[j], drop);
      out.pair_views.push_back(v);
      encodings.emplace(ViewPair{i, j}, v);
    }
  }
  out.logit = combined_smn_logit(encodings, combiner_vars(tape));
  return out;
}

ad::Var Scorer::base_logit(ad::Tape& tape, const PreparedExample& example, const DropoutSpec& drop) const {
  Parameter& w = *combiner_.at(ViewPair{0, 0});
  if (de_) {
    ad::Var vm = de_->encode_context(tape, example.contexts.at(0), drop);
    ad::Var vr = de_->encode_response(tape, example.responses.at(0), drop);
    return de_logit(vm, tape.param(w), vr);
  }
  std::vector<SmnEncoder::Utterance> messages;
  for (const IdList& m : example.contexts.at(0)) messages.push_back(smn_->encode_utterance(tape, m, drop));
  auto response = smn_->transposed(smn_->encode_utterance(tape, example.responses.at(0), drop));
  return smn_logit(smn_pair(tape, messages, response, drop), tape.param(w));
}

double Scorer::logit(const PreparedExample& example) const {
  ad::Tape tape;
  return forward(tape, example, DropoutSpec{}).logit.item();
}

std::vector<double> Scorer::candidate_logits(const std::vector<Message>& context,
                                             std::span<const TokenList> candidates) const {
  const DropoutSpec eval{};
  std::vector<double> out;
  out.reserve(candidates.size());
  if (candidates.empty()) return out;
  const PreparedExample first = prepare(context, candidates[0]);
  ad::Tape tape;
  const auto weights = combiner_vars(tape);
  if (de_) {
    std::vector<ad::Var> vm;
    for (const ContextIds& c : first.contexts) vm.push_back(de_->encode_context(tape, c, eval));
    for (const TokenList& cand : candidates) {
      std::vector<ad::Var> vr;
      for (const IdList& r : prepare({}, cand).responses) vr.push_back(de_->encode_response(tape, r, eval));
      out.push_back(combined_de_logit(vm, vr, weights).item());
    }
    return out;
  }
  auto contexts = smn_context(tape, first.contexts, eval);
  for (const TokenList& cand : candidates) {
    std::map<ViewPair, ad::Var> encodings;
    std::vector<SmnEncoder::Utterance> responses;
    for (const IdList& r : prepare({}, cand).responses) {
      responses.push_back(smn_->transposed(smn_->encode_utterance(tape, r, eval)));
    }
    for (std::size_t i = 0; i < contexts.size(); ++i)
      for (std::size_t j = 0; j < responses.size(); ++j)
        encodings.emplace(ViewPair{i, j}, smn_pair(tape, contexts[i], responses[j], eval));
    out.push_back(combined_smn_logit(encodings, weights).item());
  }
  return out;
}

}  // namespace retrorank
