#include "retrorank/cli/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace retrorank {

namespace {

constexpr std::array<char, 4> kMagic{'R', 'R', 'K', '1'};
// Guards allocations driven by corrupt length fields.
constexpr std::uint64_t kMaxString = 1u << 26;
constexpr std::uint64_t kMaxCount = 1u << 28;

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

void put_str(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw CheckpointError(std::string("checkpoint truncated in ") + what);
  }
  std::uint64_t u64(const char* what) {
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t count(const char* what, std::uint64_t limit = kMaxCount) {
    const std::uint64_t n = u64(what);
    if (n > limit) throw CheckpointError(std::string("implausible size in ") + what);
    return n;
  }
  std::string str(const char* what) {
    std::string s(count(what, kMaxString), '\0');
    if (!s.empty()) bytes(s.data(), s.size(), what);
    return s;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

 private:
  std::istream& in_;
};

std::uint8_t kind_tag(ModelKind kind) { return static_cast<std::uint8_t>(kind); }

}  // namespace

void save_checkpoint(std::ostream& out, const Scorer& scorer, const TrainingConfig& config) {
  out.write(kMagic.data(), kMagic.size());
  const char tag = static_cast<char>(kind_tag(scorer.config().kind));
  out.write(&tag, 1);
  put_u64(out, scorer.init_seed());
  put_str(out, config_to_string(config));
  put_str(out, scorer.plan().context_string());
  put_str(out, scorer.plan().response_string());
  put_str(out, std::string(scope_name(scorer.scope())));
  put_u64(out, scorer.vocab().size());
  for (const std::string& token : scorer.vocab().tokens()) put_str(out, token);
  const ParamStore& params = scorer.params();
  put_u64(out, params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = params[i];
    put_str(out, p.name);
    put_u64(out, p.value.rank());
    for (std::size_t d : p.value.shape()) put_u64(out, d);
    for (double v : p.value.data()) put_f64(out, v);
  }
  if (!out) throw Error("failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const Scorer& scorer, const TrainingConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  save_checkpoint(out, scorer, config);
}

LoadedCheckpoint load_checkpoint(std::istream& in) {
  Reader r(in);
  std::array<char, 4> magic{};
  r.bytes(magic.data(), magic.size(), "magic");
  if (magic != kMagic) throw CheckpointError("not a retrorank checkpoint (bad magic)");
  char tag = 0;
  r.bytes(&tag, 1, "model kind");
  if (static_cast<unsigned char>(tag) > kind_tag(ModelKind::Smn)) throw CheckpointError("unknown model kind tag");
  const auto kind = static_cast<ModelKind>(tag);
  const std::uint64_t seed = r.u64("seed");

  TrainingConfig config;
  std::string ctx, resp, scope;
  try {
    std::istringstream text(r.str("config"));
    config = parse_config(text, "checkpoint config", TrainingConfig::defaults(kind));
    ctx = r.str("plan");
    resp = r.str("plan");
    scope = r.str("plan");
    config.plan = AugmentationPlan::parse(ctx, resp);
    config.scope = parse_scope(scope);
  } catch (const CheckpointError&) {
    throw;
  } catch (const Error& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }
  if (config.model.kind != kind) throw CheckpointError("model kind tag disagrees with config snapshot");

  std::vector<std::string> tokens(r.count("vocabulary"));
  for (std::string& t : tokens) t = r.str("vocabulary");
  Vocab vocab;
  try {
    vocab = Vocab::from_tokens(std::move(tokens));
  } catch (const Error& e) {
    throw CheckpointError(std::string("bad vocabulary: ") + e.what());
  }

  Scorer scorer(config.model, config.plan, config.scope, std::move(vocab), seed, config.punctuation_set());
  ParamStore& params = scorer.params();
  const std::uint64_t n = r.count("parameters");
  if (n != params.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(n) + " tensors, model expects " +
                          std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    const std::string name = r.str("parameter name");
    if (name != p.name) throw CheckpointError("expected tensor '" + p.name + "', found '" + name + "'");
    Shape shape(r.count("parameter rank", 8));
    for (std::size_t& d : shape) d = r.count("parameter shape");
    if (shape != p.value.shape()) {
      throw CheckpointError("tensor '" + name + "' has shape " + shape_string(shape) + ", model expects " +
                            shape_string(p.value.shape()));
    }
    for (double& v : p.value.data()) v = r.f64("parameter values");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError("trailing bytes after checkpoint");
  return LoadedCheckpoint{std::move(config), std::move(scorer)};
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace retrorank
