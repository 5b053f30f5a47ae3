#include "retrorank/encoders/encoders.hpp"

#include <algorithm>

#include "retrorank/numcore/errors.hpp"

namespace retrorank {

namespace {

Tensor uniform_tensor(Shape shape, Prng& rng) {
  Tensor t(std::move(shape), 0.0);
  for (double& v : t.data()) v = rng.uniform(-0.05, 0.05);
  return t;
}

}  // namespace

IdList strip_pad(const IdList& ids) {
  IdList out;
  out.reserve(ids.size());
  for (int id : ids)
    if (id != kPadId) out.push_back(id);
  return out;
}

Parameter& make_embedding(ParamStore& store, const std::string& name, std::size_t vocab, std::size_t dim, Prng& init) {
  Tensor table = uniform_tensor(Shape{vocab, dim}, init);
  for (std::size_t c = 0; c < dim; ++c) table.at(0, c) = 0.0;
  return store.add(name, std::move(table));
}

DeEncoder::DeEncoder(ParamStore& store, bool hierarchical, std::size_t vocab, std::size_t embed, std::size_t hidden,
                     Prng& init) {
  embedding_ = &make_embedding(store, "embedding", vocab, embed, init);
  word_ = make_lstm(store, "word_lstm", embed, hidden, init);
  if (hierarchical) utterance_ = make_lstm(store, "utterance_lstm", hidden, hidden, init);
}

IdList DeEncoder::concatenate(const ContextIds& messages, int separator) {
  IdList flat;
  for (std::size_t m = 0; m < messages.size(); ++m) {
    if (m > 0) flat.push_back(separator);
    flat.insert(flat.end(), messages[m].begin(), messages[m].end());
  }
  return flat;
}

ad::Var DeEncoder::encode_sequence(ad::Tape& tape, const IdList& ids, const DropoutSpec& drop) const {
  const IdList kept = strip_pad(ids);
  if (kept.empty()) return lstm_final(tape, word_, nullptr);
  ad::Var x = dropout(ad::gather_rows(tape.param(*embedding_), kept), drop);
  return lstm_final(tape, word_, &x);
}

ad::Var DeEncoder::encode_context(ad::Tape& tape, const ContextIds& messages, const DropoutSpec& drop) const {
  if (messages.empty()) throw DimensionError("encode_context: empty context");
  ad::Var flat = encode_sequence(tape, concatenate(messages, kSeparatorId), drop);
  if (!hierarchical()) return flat;
  std::vector<ad::Var> per_message;
  per_message.reserve(messages.size());
  for (const IdList& m : messages) per_message.push_back(encode_sequence(tape, m, drop));
  ad::Var x = dropout(ad::stack_rows(per_message, per_message.size()), drop);
  const ad::Var parts[] = {lstm_final(tape, utterance_, &x), flat};
  return ad::concat(parts, 0);
}

SmnEncoder::SmnEncoder(ParamStore& store, const SmnDims& dims, Prng& init) : dims_(dims) {
  if (dims.max_len == 0 || dims.feature == 0 || dims.accum == 0 || dims.filters == 0) {
    throw ConfigError("SMN dimensions must be positive");
  }
  embedding_ = &make_embedding(store, "embedding", dims.vocab, dims.embed, init);
  word_ = make_lstm(store, "word_lstm", dims.embed, dims.hidden, init);
  bilinear_ = &store.add("smn.bilinear", uniform_tensor(Shape{dims.hidden, dims.hidden}, init));
  kernels_ = &store.add("smn.conv", uniform_tensor(Shape{dims.filters, 2, 3, 3}, init));
  proj_w_ = &store.add("smn.proj.w", uniform_tensor(Shape{dims.feature, pooled_size()}, init));
  proj_b_ = &store.add("smn.proj.b", Tensor(Shape{dims.feature}, 0.0));
  accum_ = make_lstm(store, "accum_lstm", dims.feature, dims.accum, init);
}

std::size_t SmnEncoder::pooled_size() const {
  const std::size_t side = (dims_.max_len + 1) / 2;
  return dims_.filters * side * side;
}

SmnEncoder::Utterance SmnEncoder::encode_utterance(ad::Tape& tape, const IdList& ids, const DropoutSpec& drop) const {
  IdList kept = strip_pad(ids);
  if (kept.size() > dims_.max_len) kept.resize(dims_.max_len);
  const std::size_t T = dims_.max_len;
  if (kept.empty()) {
    return {tape.constant(Tensor(Shape{T, dims_.embed}, 0.0)), tape.constant(Tensor(Shape{T, dims_.hidden}, 0.0))};
  }
  ad::Var e = ad::gather_rows(tape.param(*embedding_), kept);
  ad::Var x = dropout(e, drop);
  ad::Var hs = lstm_sequence(x, tape.param(*word_.w), tape.param(*word_.u), tape.param(*word_.b));
  return {ad::pad_rows(e, T), ad::pad_rows(hs, T)};
}

SmnEncoder::Utterance SmnEncoder::transposed(const Utterance& response) const {
  return {ad::transpose(response.embedded), ad::transpose(response.hidden)};
}

ad::Var SmnEncoder::match(ad::Tape& tape, const Utterance& message, const Utterance& response_t) const {
  const std::size_t T = dims_.max_len;
  ad::Var words = ad::matmul(message.embedded, response_t.embedded);
  ad::Var states = ad::matmul(ad::matmul(message.hidden, tape.param(*bilinear_)), response_t.hidden);
  const ad::Var channels[] = {ad::reshape(words, Shape{1, T, T}), ad::reshape(states, Shape{1, T, T})};
  ad::Var pooled = ad::conv2d_maxpool(ad::concat(channels, 0), tape.param(*kernels_));
  ad::Var flat = ad::reshape(pooled, Shape{pooled_size()});
  return ad::tanh(ad::add(ad::matvec(tape.param(*proj_w_), flat), tape.param(*proj_b_)));
}

ad::Var SmnEncoder::accumulate(ad::Tape& tape, std::span<const ad::Var> features, const DropoutSpec& drop) const {
  if (features.empty()) throw DimensionError("smn accumulate: no features");
  ad::Var x = dropout(ad::stack_rows(features, features.size()), drop);
  return lstm_final(tape, accum_, &x);
}

}  // namespace retrorank
