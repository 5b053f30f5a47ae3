#include "retrorank/training/train.hpp"

#include <chrono>
#include <cmath>

#include "json.hpp"
#include "retrorank/corpus/sampling.hpp"
#include "retrorank/numcore/adam.hpp"

namespace retrorank {

ad::Var bce_loss(ad::Var logit, double label) { return ad::bce_with_logits(logit, label); }

double bce_loss(double probability, double label) {
  return -(label * std::log(probability) + (1.0 - label) * std::log1p(-probability));
}

namespace {

ad::Var squared_distances(std::span<const ad::Var> views, ad::Var total) {
  for (std::size_t i = 1; i < views.size(); ++i) {
    ad::Var d = ad::sq_norm(ad::sub(views[i], views[0]));
    total = total.valid() ? ad::add(total, d) : d;
  }
  return total;
}

ad::Var finish_reg(ad::Tape& tape, ad::Var total, double t) {
  if (!total.valid()) return tape.constant(Tensor::scalar(0.0));
  return ad::scale(total, t);
}

double clip_gradients(ParamStore& params, double max_norm) {
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (double g : params[i].grad.data()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (std::size_t i = 0; i < params.size(); ++i)
      for (double& g : params[i].grad.data()) g *= s;
  }
  return norm;
}

}  // namespace

ad::Var reg_term_de(std::span<const ad::Var> views_m, std::span<const ad::Var> views_r, double t) {
  if (views_m.empty() || views_r.empty()) throw DimensionError("reg_term_de: base views missing");
  ad::Var total = squared_distances(views_r, squared_distances(views_m, ad::Var{}));
  return finish_reg(views_m[0].tape(), total, t);
}

ad::Var reg_term_smn(std::span<const ad::Var> pair_views, double t) {
  if (pair_views.empty()) throw DimensionError("reg_term_smn: base view missing");
  return finish_reg(pair_views[0].tape(), squared_distances(pair_views, ad::Var{}), t);
}

ad::Var example_loss(ad::Tape& tape, const Scorer& scorer, const TrainingConfig& config,
                     const PreparedExample& example, int label, const DropoutSpec& drop) {
  if (config.base_model) return bce_loss(scorer.base_logit(tape, example, drop), label);
  ForwardResult f = scorer.forward(tape, example, drop);
  ad::Var reg = scorer.smn() ? reg_term_smn(f.pair_views, config.t)
                             : reg_term_de(f.context_views, f.response_views, config.t);
  return ad::add(bce_loss(f.logit, label), reg);
}

std::string TrainReport::to_json() const {
  nlohmann::ordered_json j;
  j["model_kind"] = model_kind;
  j["seed"] = seed;
  j["best_epoch"] = best_epoch;
  j["best_valid_recall_at_1"] = best_valid_recall_at_1;
  j["stopped_early"] = stopped_early;
  j["num_steps"] = step_losses.size();
  auto& epochs_json = j["epochs"] = nlohmann::ordered_json::array();
  for (const EpochRecord& e : epochs) {
    epochs_json.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"valid_recall_at_1", e.valid_recall_at_1}});
  }
  j["step_losses"] = step_losses;
  return j.dump(2);
}

Scorer make_scorer(const TrainingConfig& config, const std::vector<Example>& train) {
  config.validate();
  return Scorer(config.model, config.plan, config.scope, Vocab::build(train, config.min_count), config.seed,
                config.punctuation_set());
}

TrainReport train(Scorer& scorer, const TrainingConfig& config, const std::vector<Example>& train_set,
                  const Validator& validator) {
  config.validate();
  if (train_set.empty()) throw ConfigError("training set is empty");
  const auto started = std::chrono::steady_clock::now();
  TrainReport report;
  report.model_kind = std::string(model_kind_name(scorer.config().kind));
  report.seed = config.seed;

  Prng root(config.seed);
  Prng shuffle_rng = root.substream("shuffle");
  Prng negative_rng = root.substream("negatives");
  Prng dropout_rng = root.substream("dropout");
  const DropoutSpec drop{config.dropout_rate, Mode::Train, &dropout_rng};
  const std::vector<TokenList> pool = response_pool(train_set);

  ParamStore& params = scorer.params();
  AdamState adam = make_adam_state(params, config.learning_rate);
  std::vector<Tensor> best = params.values();
  std::size_t since_best = 0;
  bool out_of_steps = false;

  for (std::size_t epoch = 1; epoch <= config.max_epochs && !out_of_steps; ++epoch) {
    std::vector<TrainItem> items;
    items.reserve(2 * train_set.size());
    for (const Example& ex : train_set) {
      items.push_back({&ex.context, ex.response, ex.label});
      if (ex.label != 1) continue;
      const TokenList& truth = ex.response;
      items.push_back({&ex.context, sample_negative(pool, [&](const TokenList& r) { return r == truth; }, negative_rng), 0});
    }
    shuffle_rng.shuffle(items);

    double epoch_loss = 0.0;
    std::size_t batch = 0;
    for (std::size_t start = 0; start < items.size(); start += config.batch_size, ++batch) {
      const std::size_t end = std::min(items.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      params.zero_grad();
      double batch_loss = 0.0;
      try {
        for (std::size_t k = start; k < end; ++k) {
          ad::Tape tape;
          PreparedExample prepared = scorer.prepare(*items[k].context, items[k].response);
          ad::Var loss = example_loss(tape, scorer, config, prepared, items[k].label, drop);
          batch_loss += loss.item();
          tape.backward(ad::scale(loss, inv));
        }
        batch_loss *= inv;
        if (!std::isfinite(batch_loss)) throw NumericError("non-finite loss");
        if (!std::isfinite(clip_gradients(params, config.max_grad_norm))) throw NumericError("non-finite gradient");
        adam_step(params, adam);
      } catch (const NumericError& e) {
        throw TrainingDiverged(epoch, batch + 1, e.what());
      }
      for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].value.all_finite()) throw TrainingDiverged(epoch, batch + 1, "non-finite parameter " + params[i].name);
      }
      report.step_losses.push_back(batch_loss);
      epoch_loss += batch_loss * static_cast<double>(end - start);
      if (config.max_steps > 0 && report.step_losses.size() >= config.max_steps) {
        out_of_steps = true;
        break;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(items.size());
    rec.valid_recall_at_1 = validator(scorer, epoch);
    report.epochs.push_back(rec);
    if (report.best_epoch == 0 || rec.valid_recall_at_1 > report.best_valid_recall_at_1) {
      report.best_epoch = epoch;
      report.best_valid_recall_at_1 = rec.valid_recall_at_1;
      best = params.values();
      since_best = 0;
    } else if (++since_best >= config.patience) {
      report.stopped_early = true;
      break;
    }
  }
  params.set_values(best);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

TrainReport train(Scorer& scorer, const TrainingConfig& config, const std::vector<Example>& train_set,
                  std::span<const CandidateSet> valid_sets) {
  if (valid_sets.empty()) throw ConfigError("validation set is empty");
  return train(scorer, config, train_set,
               [valid_sets](const Scorer& s, std::size_t) { return evaluate(s, valid_sets).recall_at_1; });
}

double mean_view_distance(const Scorer& scorer, const std::vector<Example>& examples) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const Example& ex : examples) {
    ad::Tape tape;
    ForwardResult f = scorer.forward(tape, scorer.prepare(ex.context, ex.response), DropoutSpec{});
    ad::Var d = scorer.smn() ? reg_term_smn(f.pair_views, 1.0) : reg_term_de(f.context_views, f.response_views, 1.0);
    total += d.item();
  }
  return total / static_cast<double>(examples.size());
}

}  // namespace retrorank
