#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "retrorank/corpus/corpus.hpp"
#include "retrorank/scoring/model.hpp"
#include "retrorank/transforms/transforms.hpp"

namespace retrorank {

inline constexpr std::uint64_t kDefaultSeed = 2018;

struct TrainingConfig {
  ModelConfig model;
  AugmentationPlan plan;
  FlipScope scope = FlipScope::ContextOnly;
  std::string punctuation;  // empty: default set

  double t = 0.05;
  double learning_rate = 0.001;
  double dropout_rate = 0.0;
  std::size_t max_epochs = 50;
  std::size_t patience = 3;
  std::size_t batch_size = 32;
  // Stop after this many optimizer steps (0: no limit).
  std::size_t max_steps = 0;
  // Global gradient-norm clip (0: off).
  double max_grad_norm = 0.0;
  std::uint64_t seed = kDefaultSeed;
  // Train the unaugmented model on view (0,0) with no regularizer.
  bool base_model = false;

  std::size_t min_count = 1;
  std::size_t valid_candidates = 10;
  std::size_t max_context_turns = 10;
  std::size_t max_tokens_per_message = 50;

  // Model defaults plus the default plan: flip on contexts for the DE models,
  // flip on contexts and responses for SMN.
  static TrainingConfig defaults(ModelKind kind);
  void validate() const;

  PunctuationSet punctuation_set() const;
  CorpusOptions corpus_options() const;
};

// Flat `key = value` lines; '#' starts a comment. Keys are the field names
// above plus model_kind, embed_dim, hidden_dim, feature_dim, accum_dim,
// filters, max_len, ctx_transforms, resp_transforms and flip_scope.
// Setting model_kind first resets dimensions and plan to that kind's defaults.
void apply_config_line(TrainingConfig& config, std::string_view key, std::string_view value);
TrainingConfig parse_config(std::istream& in, const std::string& source, TrainingConfig base);
TrainingConfig load_config(const std::filesystem::path& path, TrainingConfig base);
std::string config_to_string(const TrainingConfig& config);

}  // namespace retrorank
