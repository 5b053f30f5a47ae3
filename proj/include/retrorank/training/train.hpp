#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "retrorank/corpus/types.hpp"
#include "retrorank/eval/eval.hpp"
#include "retrorank/numcore/dropout.hpp"
#include "retrorank/numcore/errors.hpp"
#include "retrorank/training/config.hpp"

namespace retrorank {

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::size_t epoch, std::size_t batch, const std::string& what)
      : Error("training diverged at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ": " + what),
        epoch_(epoch),
        batch_(batch) {}
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

// Binary cross-entropy of sigmoid(logit); probability form for inspection.
ad::Var bce_loss(ad::Var logit, double label);
double bce_loss(double probability, double label);

// t * (sum_i |v(m^i) - v(m^0)|^2 + sum_j |v(r^j) - v(r^0)|^2); index 0 is the base view.
ad::Var reg_term_de(std::span<const ad::Var> views_m, std::span<const ad::Var> views_r, double t);
// t * sum_ij |v(m^i, r^j) - v(m^0, r^0)|^2 over pair views with (0,0) first.
ad::Var reg_term_smn(std::span<const ad::Var> pair_views, double t);

struct TrainItem {
  const std::vector<Message>* context;
  TokenList response;
  int label;
};

// Per-example objective: bce(combined logit) + reg, or bce(base logit) when
// config.base_model is set.
ad::Var example_loss(ad::Tape& tape, const Scorer& scorer, const TrainingConfig& config,
                     const PreparedExample& example, int label, const DropoutSpec& drop);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_recall_at_1 = 0.0;
};

struct TrainReport {
  std::string model_kind;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  std::vector<double> step_losses;
  std::size_t best_epoch = 0;
  double best_valid_recall_at_1 = 0.0;
  bool stopped_early = false;
  // Not serialized, so reports of identical runs are byte-identical.
  double wall_seconds = 0.0;

  std::string to_json() const;
};

// Validation score for the epoch just finished; higher is better.
using Validator = std::function<double(const Scorer&, std::size_t epoch)>;

Scorer make_scorer(const TrainingConfig& config, const std::vector<Example>& train);

// Shuffles, adds one freshly sampled negative per positive, and runs Adam on
// mean(loss) per batch. Stops after `patience` epochs without improvement and
// leaves the best epoch's parameters in the scorer.
TrainReport train(Scorer& scorer, const TrainingConfig& config, const std::vector<Example>& train_set,
                  const Validator& validator);
TrainReport train(Scorer& scorer, const TrainingConfig& config, const std::vector<Example>& train_set,
                  std::span<const CandidateSet> valid_sets);

// Mean over examples of the summed squared distances between each
// transformed view encoding and its base view (eval mode).
double mean_view_distance(const Scorer& scorer, const std::vector<Example>& examples);

}  // namespace retrorank
