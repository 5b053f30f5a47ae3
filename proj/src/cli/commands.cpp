#include "retrorank/cli/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "retrorank/cli/checkpoint.hpp"
#include "retrorank/corpus/corpus.hpp"
#include "retrorank/corpus/embeddings.hpp"
#include "retrorank/corpus/sampling.hpp"
#include "retrorank/corpus/synthetic.hpp"
#include "retrorank/eval/eval.hpp"
#include "retrorank/training/gradsuite.hpp"
#include "retrorank/training/train.hpp"

namespace retrorank {

namespace {

std::uint64_t parse_seed(const std::string& text, const char* what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) throw ConfigError(std::string("invalid seed in ") + what + ": '" + text + "'");
  return v;
}

// Opens `path` for writing, "-" meaning `fallback`.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error("cannot open " + path + " for writing");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

Prng candidate_rng(std::uint64_t seed) { return Prng(seed).substream("candidates"); }

struct AugmentArgs {
  std::string in, out = "-", ctx, resp, punct, scope = "context_and_response";
};

int cmd_augment(const AugmentArgs& a, std::ostream& out) {
  CorpusOptions corpus;
  if (!a.punct.empty()) corpus.tokenizer.punctuation = parse_punctuation(a.punct);
  const auto examples = load_corpus(a.in, corpus);
  const AugmentationPlan plan = AugmentationPlan::parse(a.ctx, a.resp);
  const FlipScope scope = parse_scope(a.scope);
  Output dst(a.out, out);
  for (const Example& ex : examples) {
    for (const TransformedExample& t : apply_plan(ex, plan, scope, corpus.tokenizer.punctuation)) {
      nlohmann::ordered_json j;
      j["context_index"] = t.context_index;
      j["response_index"] = t.response_index;
      const nlohmann::json body = example_to_json(t.example);
      for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
      *dst << j.dump() << '\n';
    }
  }
  return kExitOk;
}

struct TrainArgs {
  std::string config, train, valid, checkpoint, embeddings, model_kind;
  std::optional<std::string> seed;
  std::optional<std::size_t> max_epochs;
  std::vector<std::string> overrides;
};

TrainingConfig resolve_config(const TrainArgs& a) {
  TrainingConfig config = TrainingConfig::defaults(ModelKind::LstmDe);
  config.seed = default_seed();
  if (!a.config.empty()) config = load_config(a.config, config);
  if (!a.model_kind.empty()) apply_config_line(config, "model_kind", a.model_kind);
  for (const std::string& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_config_line(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.max_epochs) config.max_epochs = *a.max_epochs;
  if (a.seed) config.seed = parse_seed(*a.seed, "--seed");
  config.validate();
  return config;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const TrainingConfig config = resolve_config(a);
  const CorpusOptions corpus = config.corpus_options();
  const auto train_set = load_corpus(a.train, corpus);
  const auto valid_set = load_corpus(a.valid, corpus);
  Prng cand = candidate_rng(config.seed);
  const auto valid_sets = build_candidate_sets(valid_set, config.valid_candidates, cand);

  Scorer scorer = make_scorer(config, train_set);
  if (!a.embeddings.empty()) {
    Prng rng = Prng(config.seed).substream("embeddings");
    scorer.set_embeddings(load_embeddings(a.embeddings, scorer.vocab(), config.model.embed_dim, rng));
  }
  err << "training " << model_kind_name(config.model.kind) << " seed=" << config.seed
      << " params=" << scorer.params().scalar_count() << " vocab=" << scorer.vocab().size() << '\n';
  const TrainReport report = train(scorer, config, train_set, valid_sets);
  save_checkpoint(a.checkpoint, scorer, config);
  const std::string report_path = a.checkpoint + ".report.json";
  {
    Output dst(report_path, out);
    *dst << report.to_json() << '\n';
  }
  err << "wall_seconds=" << report.wall_seconds << '\n';
  out << "best_epoch=" << report.best_epoch << " valid_recall_at_1=" << report.best_valid_recall_at_1
      << " seed=" << config.seed << " checkpoint=" << a.checkpoint << " report=" << report_path << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint, test, tsv;
  std::size_t k = 10;
  std::optional<std::string> seed;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  LoadedCheckpoint ck = load_checkpoint(a.checkpoint);
  const std::uint64_t seed = a.seed ? parse_seed(*a.seed, "--seed") : ck.config.seed;
  const auto test_set = load_corpus(a.test, ck.config.corpus_options());
  Prng cand = candidate_rng(seed);
  const auto sets = build_candidate_sets(test_set, a.k, cand);
  const EvalReport report = evaluate(ck.scorer, sets);
  err << "seed=" << seed << " k=" << a.k << '\n';
  out << report_json(report) << '\n';
  if (!a.tsv.empty()) {
    Output dst(a.tsv, out);
    write_rank_tsv(*dst, report);
  }
  return kExitOk;
}

struct ScoreArgs {
  std::string checkpoint, candidates_file;
  std::vector<std::string> context, candidates;
};

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  LoadedCheckpoint ck = load_checkpoint(a.checkpoint);
  const CorpusOptions opts = ck.config.corpus_options();
  std::vector<std::string> texts = a.candidates;
  if (!a.candidates_file.empty()) {
    std::ifstream in(a.candidates_file);
    if (!in) throw Error("cannot open candidates file " + a.candidates_file);
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) texts.push_back(line);
  }
  if (texts.empty()) throw ConfigError("no candidates given");
  if (a.context.empty()) throw ConfigError("no context messages given");
  Example ex;
  for (const std::string& m : a.context) {
    TokenList toks = tokenize(m, opts.tokenizer);
    if (!toks.empty()) ex.context.push_back({"", std::move(toks)});
  }
  if (ex.context.empty()) throw ConfigError("context messages are empty");
  truncate_example(ex, opts);
  std::vector<TokenList> cands;
  for (const std::string& c : texts) {
    Example one{{}, tokenize(c, opts.tokenizer), 1};
    if (one.response.empty()) throw ConfigError("empty candidate");
    truncate_example(one, opts);
    cands.push_back(std::move(one.response));
  }
  const RankedSet ranked = rank_logits(ck.scorer.candidate_logits(ex.context, cands), 0);
  out.precision(17);
  for (std::size_t pos = 0; pos < ranked.order.size(); ++pos) {
    const std::size_t c = ranked.order[pos];
    out << pos + 1 << '\t' << ranked.logits[c] << '\t' << ad::stable_sigmoid(ranked.logits[c]) << '\t' << texts[c]
        << '\n';
  }
  return kExitOk;
}

struct GradArgs {
  std::string model_kind = "lstm_de";
  std::size_t dims = 4;
  std::string plan = "both";
  std::optional<std::string> seed;
};

int cmd_gradcheck(const GradArgs& a, std::ostream& out) {
  GradSuiteOptions o;
  o.kind = parse_model_kind(a.model_kind);
  o.dims = a.dims;
  if (a.seed) o.seed = parse_seed(*a.seed, "--seed");
  std::vector<bool> variants;
  if (a.plan == "identity" || a.plan == "both") variants.push_back(false);
  if (a.plan == "2x2" || a.plan == "both") variants.push_back(true);
  if (variants.empty()) throw ConfigError("--plan must be identity, 2x2 or both");
  bool ok = true;
  for (bool augmented : variants) {
    o.augmented = augmented;
    const GradCheckReport r = run_grad_suite(o);
    const bool pass = r.max_rel_error < 1e-4;
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << a.model_kind << " plan=" << (augmented ? "2x2" : "identity")
        << " dims=" << a.dims << " seed=" << o.seed << " checked=" << r.checked << " max_rel_error=" << r.max_rel_error
        << " worst=" << r.worst.param << "[" << r.worst.index << "]\n";
  }
  return ok ? kExitOk : kExitCheckFailed;
}

struct SynthArgs {
  std::string out = "-";
  std::size_t pairs = 200;
  double penultimate_rate = 0.0;
  std::optional<std::string> seed;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SyntheticOptions o;
  o.num_pairs = a.pairs;
  o.penultimate_rate = a.penultimate_rate;
  o.seed = a.seed ? parse_seed(*a.seed, "--seed") : default_seed();
  Output dst(a.out, out);
  save_corpus(*dst, generate_synthetic(o));
  return kExitOk;
}

}  // namespace

std::uint64_t default_seed() {
  if (const char* env = std::getenv("RETRORANK_SEED"); env != nullptr && *env != '\0') {
    return parse_seed(env, "RETRORANK_SEED");
  }
  return kDefaultSeed;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Response selection with multi-view data augmentation", "retrorank"};
  app.require_subcommand(1);

  AugmentArgs aug;
  auto* augment = app.add_subcommand("augment", "Write every transformed view of a corpus");
  augment->add_option("--in", aug.in, "Input corpus (JSONL)")->required();
  augment->add_option("--out", aug.out, "Output path, - for stdout");
  augment->add_option("--ctx-transforms", aug.ctx, "Context transforms: permute_last,permute_penult,flip");
  augment->add_option("--resp-transforms", aug.resp, "Response transforms: flip");
  augment->add_option("--punct", aug.punct, "Punctuation characters for tokenizing and flipping");
  augment->add_option("--scope", aug.scope, "context_only or context_and_response");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  train_cmd->add_option("--config", tr.config, "key = value config file");
  train_cmd->add_option("--train", tr.train, "Training corpus")->required();
  train_cmd->add_option("--valid", tr.valid, "Validation corpus")->required();
  train_cmd->add_option("--out-checkpoint", tr.checkpoint, "Checkpoint path")->required();
  train_cmd->add_option("--embeddings", tr.embeddings, "word2vec text embeddings");
  train_cmd->add_option("--model-kind", tr.model_kind, "lstm_de, hre_de or smn");
  train_cmd->add_option("--seed", tr.seed, "Seed (overrides config and RETRORANK_SEED)");
  train_cmd->add_option("--max-epochs", tr.max_epochs, "Epoch limit");
  train_cmd->add_option("--set", tr.overrides, "Config override key=value (repeatable)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Recall-at-k on candidate sets built from a corpus");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint path")->required();
  eval_cmd->add_option("--test", ev.test, "Test corpus")->required();
  eval_cmd->add_option("--k", ev.k, "Candidates per set")->check(CLI::Range(2, 1000000));
  eval_cmd->add_option("--seed", ev.seed, "Seed for distractor sampling");
  eval_cmd->add_option("--tsv", ev.tsv, "Per-set rank TSV output");

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "Rank candidate responses for one context");
  score->add_option("--checkpoint", sc.checkpoint, "Checkpoint path")->required();
  score->add_option("--context", sc.context, "Context message, oldest first (repeatable)")->required();
  score->add_option("--candidates", sc.candidates, "Candidate response (repeatable)");
  score->add_option("--candidates-file", sc.candidates_file, "One candidate per line");

  GradArgs gr;
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of the training loss");
  grad->add_option("--model-kind", gr.model_kind, "lstm_de, hre_de or smn");
  grad->add_option("--dims", gr.dims, "Toy dimension")->check(CLI::Range(1, 64));
  grad->add_option("--plan", gr.plan, "identity, 2x2 or both");
  grad->add_option("--seed", gr.seed, "Seed");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Generate the synthetic template corpus");
  synth->add_option("--out", sy.out, "Output path, - for stdout");
  synth->add_option("--pairs", sy.pairs, "Number of dialogs");
  synth->add_option("--penultimate-rate", sy.penultimate_rate, "Share of dialogs deciding in the penultimate turn")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--seed", sy.seed, "Seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*augment) return cmd_augment(aug, out);
    if (*train_cmd) return cmd_train(tr, out, err);
    if (*eval_cmd) return cmd_eval(ev, out, err);
    if (*score) return cmd_score(sc, out);
    if (*grad) return cmd_gradcheck(gr, out);
    if (*synth) return cmd_synth(sy, out);
  } catch (const TrainingDiverged& e) {
    err << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadCheckpoint;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace retrorank
