#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "retrorank/corpus/types.hpp"
#include "retrorank/corpus/vocab.hpp"
#include "retrorank/encoders/encoders.hpp"
#include "retrorank/scoring/score.hpp"
#include "retrorank/transforms/transforms.hpp"

namespace retrorank {

enum class ModelKind { LstmDe, HreDe, Smn };

std::string_view model_kind_name(ModelKind kind);
// lstm_de | hre_de | smn
ModelKind parse_model_kind(std::string_view name);

struct ModelConfig {
  ModelKind kind = ModelKind::LstmDe;
  std::size_t embed_dim = 300;
  std::size_t hidden_dim = 300;
  // SMN only.
  std::size_t feature_dim = 50;
  std::size_t accum_dim = 50;
  std::size_t filters = 8;
  std::size_t max_len = 50;

  // DE models: 300/300. SMN: embed 200, word hidden 200.
  static ModelConfig defaults(ModelKind kind);
  void validate() const;
};

// Id lists for every transformed view of one (context, response) pair.
struct PreparedExample {
  std::vector<ContextIds> contexts;  // by context transform index i
  std::vector<IdList> responses;     // by response transform index j
};

struct ForwardResult {
  ad::Var logit;
  // DE: v(m^i) and v(r^j). SMN: v(m^i, r^j) row-major over (i, j).
  std::vector<ad::Var> context_views;
  std::vector<ad::Var> response_views;
  std::vector<ad::Var> pair_views;
};

// A scoring model: vocabulary, augmentation plan, encoder parameters and one
// combiner weight (M_ij or w_ij) per plan pair, all in one ParamStore.
// Identity-only plans make the combined score the plain base score.
class Scorer {
 public:
  Scorer(ModelConfig config, AugmentationPlan plan, FlipScope scope, Vocab vocab, std::uint64_t init_seed,
         PunctuationSet punctuation = default_punctuation());
  Scorer(Scorer&&) = default;
  Scorer& operator=(Scorer&&) = default;

  const ModelConfig& config() const { return config_; }
  const AugmentationPlan& plan() const { return plan_; }
  FlipScope scope() const { return scope_; }
  const Vocab& vocab() const { return vocab_; }
  const PunctuationSet& punctuation() const { return punctuation_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  std::uint64_t init_seed() const { return init_seed_; }

  std::size_t num_context_views() const { return plan_.context_transforms.size(); }
  std::size_t num_response_views() const { return response_transforms_.size(); }
  std::vector<ViewPair> pairs() const;
  const DeEncoder* de() const { return de_ ? &*de_ : nullptr; }
  const SmnEncoder* smn() const { return smn_ ? &*smn_ : nullptr; }

  // Replaces the embedding table (rows in vocabulary order, PAD row zeroed).
  void set_embeddings(const Tensor& table);

  PreparedExample prepare(const std::vector<Message>& context, const TokenList& response) const;
  ForwardResult forward(ad::Tape& tape, const PreparedExample& example, const DropoutSpec& drop) const;
  // The unaugmented model on view (0,0) with the (0,0) combiner weight.
  ad::Var base_logit(ad::Tape& tape, const PreparedExample& example, const DropoutSpec& drop) const;

  double logit(const PreparedExample& example) const;
  // Eval-mode logits, one per candidate; context views are encoded once.
  std::vector<double> candidate_logits(const std::vector<Message>& context, std::span<const TokenList> candidates) const;

 private:
  ContextIds encode_context_ids(const std::vector<Message>& context) const;
  std::map<ViewPair, ad::Var> combiner_vars(ad::Tape& tape) const;
  std::vector<std::vector<SmnEncoder::Utterance>> smn_context(ad::Tape& tape, const std::vector<ContextIds>& views,
                                                              const DropoutSpec& drop) const;
  ad::Var smn_pair(ad::Tape& tape, const std::vector<SmnEncoder::Utterance>& messages,
                   const SmnEncoder::Utterance& response_t, const DropoutSpec& drop) const;

  ModelConfig config_;
  AugmentationPlan plan_;
  FlipScope scope_;
  std::vector<TransformKind> response_transforms_;
  Vocab vocab_;
  PunctuationSet punctuation_;
  std::uint64_t init_seed_;
  ParamStore params_;
  std::optional<DeEncoder> de_;
  std::optional<SmnEncoder> smn_;
  std::map<ViewPair, Parameter*> combiner_;
};

}  // namespace retrorank
