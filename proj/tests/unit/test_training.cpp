#include <cmath>
#include <sstream>

#include "doctest.h"
#include "retrorank/corpus/sampling.hpp"
#include "retrorank/corpus/synthetic.hpp"
#include "retrorank/training/gradsuite.hpp"
#include "retrorank/training/train.hpp"

using namespace retrorank;

namespace {

struct RefSplitMix {
  std::uint64_t s;
  std::uint64_t next() {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

TrainingConfig tiny(ModelKind kind) {
  TrainingConfig c = TrainingConfig::defaults(kind);
  c.model.embed_dim = 6;
  c.model.hidden_dim = 6;
  c.model.feature_dim = 4;
  c.model.accum_dim = 4;
  c.model.filters = 2;
  c.model.max_len = 8;
  c.learning_rate = 0.01;
  c.batch_size = 8;
  c.max_epochs = 3;
  c.seed = 11;
  return c;
}

std::vector<Example> corpus(std::size_t n, std::uint64_t seed = 2018) {
  SyntheticOptions so;
  so.num_pairs = n;
  so.seed = seed;
  return generate_synthetic(so);
}

}  // namespace

TEST_CASE("bce_loss examples") {
  CHECK(bce_loss(0.5, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bce_loss(1.0 - 1e-12, 1) < 1e-11);
  CHECK(bce_loss(1e-12, 0) < 1e-11);
  const double s1 = 1.0 / (1.0 + std::exp(-1.0));
  CHECK(bce_loss(s1, 0) == doctest::Approx(1.3132616875182228).epsilon(1e-12));
  ad::Tape tape;
  CHECK(bce_loss(tape.constant(Tensor::scalar(1.0)), 0).item() == doctest::Approx(std::log1p(std::exp(1.0))).epsilon(1e-15));
  CHECK(bce_loss(tape.constant(Tensor::scalar(0.0)), 1).item() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(std::isfinite(bce_loss(tape.constant(Tensor::scalar(-800.0)), 1).item()));
}

TEST_CASE("regularizer terms") {
  ad::Tape tape;
  Prng rng(1);
  auto rand_vec = [&](std::size_t n) {
    Tensor t(Shape{n}, 0.0);
    for (double& v : t.data()) v = rng.uniform(-1, 1);
    return t;
  };
  const Tensor base = rand_vec(3), rbase = rand_vec(3);
  const ad::Var only_m[] = {tape.constant(base)};
  const ad::Var only_r[] = {tape.constant(rbase)};
  CHECK(reg_term_de(only_m, only_r, 0.05).item() == 0.0);
  CHECK(reg_term_smn(only_m, 0.05).item() == 0.0);

  Tensor moved = base;
  moved[0] += 1.0;
  const ad::Var shifted[] = {tape.constant(base), tape.constant(moved)};
  CHECK(reg_term_de(shifted, only_r, 0.05).item() == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(reg_term_smn(shifted, 0.05).item() == doctest::Approx(0.05).epsilon(1e-12));

  const Tensor m1 = rand_vec(3), m2 = rand_vec(3), r1 = rand_vec(3);
  double want = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    want += (m1[k] - base[k]) * (m1[k] - base[k]) + (m2[k] - base[k]) * (m2[k] - base[k]);
    want += (r1[k] - rbase[k]) * (r1[k] - rbase[k]);
  }
  const ad::Var vm[] = {tape.constant(base), tape.constant(m1), tape.constant(m2)};
  const ad::Var vr[] = {tape.constant(rbase), tape.constant(r1)};
  CHECK(reg_term_de(vm, vr, 0.07).item() == doctest::Approx(0.07 * want).epsilon(1e-12));

  for (int trial = 0; trial < 100; ++trial) {
    const ad::Var views[] = {tape.constant(rand_vec(4)), tape.constant(rand_vec(4)), tape.constant(rand_vec(4))};
    CHECK(reg_term_smn(views, 0.1).item() > 0.0);
    const ad::Var same[] = {views[0], views[0], views[0]};
    CHECK(reg_term_smn(same, 0.1).item() == 0.0);
  }
}

TEST_CASE("dropout_apply") {
  Prng rng(3);
  Tensor x = Tensor::vector({1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(dropout_apply(x, 0.0, rng, Mode::Train) == x);
  CHECK(dropout_apply(x, 0.5, rng, Mode::Eval) == x);
  CHECK_THROWS_AS(dropout_apply(x, 1.0, rng, Mode::Train), ConfigError);

  Prng seeded(2024);
  Tensor got = dropout_apply(x, 0.5, seeded, Mode::Train);
  RefSplitMix ref{2024};
  for (std::size_t i = 0; i < 8; ++i) CHECK(got[i] == (ref.uniform() < 0.5 ? 0.0 : 2.0 * x[i]));
  // the frozen mask for this seed
  std::vector<int> kept;
  for (double v : got.data()) kept.push_back(v != 0.0);
  CHECK(kept == std::vector<int>{1, 0, 0, 0, 1, 1, 0, 1});

  Prng many(8);
  Tensor fixed = Tensor::vector({0.5, -1.5, 2.0});
  std::vector<double> mean(3, 0.0);
  const int n = 100000;
  for (int s = 0; s < n; ++s) {
    Tensor d = dropout_apply(fixed, 0.5, many, Mode::Train);
    for (std::size_t k = 0; k < 3; ++k) mean[k] += d[k] / n;
  }
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(mean[k] - fixed[k]) <= 0.02 * std::abs(fixed[k]));
}

TEST_CASE("config parsing") {
  std::istringstream in(
      "# toy run\n"
      "model_kind = smn\n"
      "embed_dim = 8   # small\n"
      "t=0.1\n"
      "ctx_transforms = flip, permute_last\n"
      "\n"
      "seed = 77\n"
      "base_model = false\n");
  TrainingConfig c = parse_config(in, "cfg", TrainingConfig::defaults(ModelKind::LstmDe));
  CHECK(c.model.kind == ModelKind::Smn);
  CHECK(c.model.embed_dim == 8);
  CHECK(c.model.hidden_dim == 200);
  CHECK(c.t == 0.1);
  CHECK(c.seed == 77);
  CHECK(c.plan.context_string() == "identity,flip,permute_last");
  CHECK(c.plan.response_string() == "identity,flip");
  CHECK(c.scope == FlipScope::ContextAndResponse);

  std::istringstream back(config_to_string(c));
  TrainingConfig again = parse_config(back, "snapshot", TrainingConfig{});
  CHECK(config_to_string(again) == config_to_string(c));

  auto bad = [](const std::string& text) {
    std::istringstream s(text);
    return parse_config(s, "bad", TrainingConfig{});
  };
  try {
    bad("t = 0.1\nwidth = 3\n");
    FAIL("expected error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(bad("t = -1\n"), ConfigError);
  CHECK_THROWS_AS(bad("dropout_rate = 1\n"), ConfigError);
  CHECK_THROWS_AS(bad("patience = 0\n"), ConfigError);
  CHECK_THROWS_AS(bad("batch_size = x\n"), ParseError);
  CHECK_THROWS_AS(bad("just words\n"), ParseError);

  TrainingConfig de = TrainingConfig::defaults(ModelKind::HreDe);
  CHECK(de.t == 0.05);
  CHECK(de.learning_rate == 0.001);
  CHECK(de.batch_size == 32);
  CHECK(de.patience == 3);
  CHECK(de.model.hidden_dim == 300);
  CHECK(de.plan.context_string() == "identity,flip");
  CHECK(de.scope == FlipScope::ContextOnly);
}

TEST_CASE("early stopping keeps the best epoch") {
  auto data = corpus(20);
  TrainingConfig c = tiny(ModelKind::LstmDe);
  c.patience = 1;
  c.max_epochs = 10;
  Scorer scorer = make_scorer(c, data);
  std::vector<Tensor> after_first;
  TrainReport r = train(scorer, c, data, [&](const Scorer& s, std::size_t epoch) {
    if (epoch == 1) after_first = s.params().values();
    return 1.0 - 0.1 * static_cast<double>(epoch);
  });
  CHECK(r.epochs.size() == 2);
  CHECK(r.best_epoch == 1);
  CHECK(r.stopped_early);
  CHECK(r.best_valid_recall_at_1 == doctest::Approx(0.9));
  CHECK(scorer.params().values() == after_first);
}

TEST_CASE("identity plan with t = 0 reproduces the base trainer") {
  auto data = corpus(30);
  for (ModelKind kind : {ModelKind::LstmDe, ModelKind::HreDe, ModelKind::Smn}) {
    CAPTURE(model_kind_name(kind));
    TrainingConfig c = tiny(kind);
    c.plan = AugmentationPlan::identity();
    c.t = 0.0;
    c.dropout_rate = 0.5;
    c.max_steps = 12;
    TrainingConfig base = c;
    base.base_model = true;
    auto never = [](const Scorer&, std::size_t) { return 0.0; };
    Scorer a = make_scorer(c, data), b = make_scorer(base, data);
    TrainReport ra = train(a, c, data, never), rb = train(b, base, data, never);
    REQUIRE(ra.step_losses.size() == 12);
    CHECK(ra.step_losses == rb.step_losses);
    CHECK(a.params().values() == b.params().values());
  }
}

TEST_CASE("seeded training is reproducible") {
  auto data = corpus(50);
  Prng cand(1);
  auto valid = build_candidate_sets(data, 5, cand);
  TrainingConfig c = tiny(ModelKind::LstmDe);
  c.dropout_rate = 0.5;
  Scorer a = make_scorer(c, data), b = make_scorer(c, data);
  const std::string ra = train(a, c, data, valid).to_json();
  const std::string rb = train(b, c, data, valid).to_json();
  CHECK(ra == rb);
  CHECK(ra.find("\"seed\": 11") != std::string::npos);
  c.seed = 12;
  Scorer d = make_scorer(c, data);
  CHECK(train(d, c, data, valid).to_json() != ra);
}

TEST_CASE("divergence names the epoch and batch") {
  auto data = corpus(20);
  TrainingConfig c = tiny(ModelKind::LstmDe);
  c.learning_rate = 1e305;
  Scorer s = make_scorer(c, data);
  try {
    train(s, c, data, [](const Scorer&, std::size_t) { return 0.0; });
    FAIL("expected divergence");
  } catch (const TrainingDiverged& e) {
    CHECK(e.epoch() == 1);
    CHECK(e.batch() >= 1);
    CHECK(std::string(e.what()).find("epoch 1, batch") != std::string::npos);
  }
}

TEST_CASE("full loss gradients at toy dims") {
  for (ModelKind kind : {ModelKind::LstmDe, ModelKind::HreDe, ModelKind::Smn}) {
    for (bool augmented : {false, true}) {
      CAPTURE(model_kind_name(kind));
      CAPTURE(augmented);
      GradSuiteOptions o;
      o.kind = kind;
      o.augmented = augmented;
      const GradCheckReport r = run_grad_suite(o);
      CHECK(r.max_rel_error < 1e-4);
      CHECK(r.checked > 100);
    }
  }
}

TEST_CASE("mean_view_distance") {
  auto data = corpus(10);
  TrainingConfig c = tiny(ModelKind::LstmDe);
  c.plan = AugmentationPlan::identity();
  CHECK(mean_view_distance(make_scorer(c, data), data) == 0.0);
  c.plan = AugmentationPlan::parse("flip", "");
  CHECK(mean_view_distance(make_scorer(c, data), data) > 0.0);
}
