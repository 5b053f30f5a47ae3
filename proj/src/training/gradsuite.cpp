#include "retrorank/training/gradsuite.hpp"

#include "retrorank/corpus/synthetic.hpp"
#include "retrorank/training/train.hpp"

namespace retrorank {

GradCheckReport run_grad_suite(const GradSuiteOptions& options) {
  SyntheticOptions so;
  so.num_pairs = 3;
  so.num_keys = 3;
  so.num_modifiers = 2;
  so.penultimate_rate = 0.5;
  so.seed = options.seed;
  std::vector<Example> examples = generate_synthetic(so);
  // one negative pairing so both label terms are exercised
  examples.push_back({examples[0].context, examples[1].response, 0});

  TrainingConfig config = TrainingConfig::defaults(options.kind);
  config.model.embed_dim = options.dims;
  config.model.hidden_dim = options.dims;
  config.model.feature_dim = options.dims;
  config.model.accum_dim = options.dims;
  config.model.filters = 2;
  config.model.max_len = 6;
  config.plan = options.augmented ? AugmentationPlan::parse("flip", "flip") : AugmentationPlan::identity();
  config.scope = FlipScope::ContextAndResponse;
  config.t = options.t;
  config.seed = options.seed;

  Scorer scorer = make_scorer(config, examples);
  // Spread the weights so every path carries a gradient well above the
  // finite-difference noise floor.
  Prng spread = Prng(options.seed).substream("gradcheck");
  for (std::size_t i = 0; i < scorer.params().size(); ++i) {
    Parameter& p = scorer.params()[i];
    for (double& v : p.value.data()) v = spread.uniform(-0.5, 0.5);
    if (p.name == "embedding")
      for (std::size_t c = 0; c < p.value.dim(1); ++c) p.value.at(0, c) = 0.0;
  }
  std::vector<PreparedExample> prepared;
  std::vector<int> labels;
  for (const Example& ex : examples) {
    prepared.push_back(scorer.prepare(ex.context, ex.response));
    labels.push_back(ex.label);
  }
  return check_gradients(scorer.params(), [&](ad::Tape& tape) {
    ad::Var total;
    for (std::size_t k = 0; k < prepared.size(); ++k) {
      ad::Var loss = example_loss(tape, scorer, config, prepared[k], labels[k], DropoutSpec{});
      total = total.valid() ? ad::add(total, loss) : loss;
    }
    return total;
  });
}

}  // namespace retrorank
