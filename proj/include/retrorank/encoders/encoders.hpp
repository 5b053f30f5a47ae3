#pragma once

#include <span>
#include <vector>

#include "retrorank/encoders/lstm.hpp"
#include "retrorank/numcore/dropout.hpp"

namespace retrorank {

// Token ids of one utterance; PAD ids are dropped before encoding.
using IdList = std::vector<int>;
using ContextIds = std::vector<IdList>;

// Reserved ids shared with the vocabulary.
inline constexpr int kPadId = 0;
inline constexpr int kSeparatorId = 2;

IdList strip_pad(const IdList& ids);

// Embedding table [vocab x dim], Uniform(-0.05, 0.05) with the PAD row zero.
Parameter& make_embedding(ParamStore& store, const std::string& name, std::size_t vocab, std::size_t dim, Prng& init);

// Word-level LSTM shared by the context and response sides. The flat context
// view joins messages oldest-first with the separator id between them. The
// hierarchical variant also runs an utterance-level LSTM over per-message
// final hiddens and returns [utterance ; flat], twice the hidden size.
class DeEncoder {
 public:
  DeEncoder(ParamStore& store, bool hierarchical, std::size_t vocab, std::size_t embed, std::size_t hidden, Prng& init);

  bool hierarchical() const { return utterance_.w != nullptr; }
  std::size_t hidden_dim() const { return word_.hidden_dim; }
  std::size_t context_dim() const { return hierarchical() ? 2 * hidden_dim() : hidden_dim(); }
  std::size_t response_dim() const { return hidden_dim(); }

  ad::Var encode_sequence(ad::Tape& tape, const IdList& ids, const DropoutSpec& drop) const;
  ad::Var encode_context(ad::Tape& tape, const ContextIds& messages, const DropoutSpec& drop) const;
  ad::Var encode_response(ad::Tape& tape, const IdList& ids, const DropoutSpec& drop) const {
    return encode_sequence(tape, ids, drop);
  }

  // The separator-joined id list fed to the flat pass.
  static IdList concatenate(const ContextIds& messages, int separator);

 private:
  Parameter* embedding_;
  LstmParams word_;
  LstmParams utterance_;
};

struct SmnDims {
  std::size_t vocab = 0;
  std::size_t embed = 200;
  std::size_t hidden = 200;
  std::size_t feature = 50;  // p
  std::size_t accum = 50;    // q
  std::size_t filters = 8;
  std::size_t max_len = 50;  // T_m = T_r
};

// Matching features per (message, response) pair from two T x T similarity
// channels (embedding dot products and a bilinear form over word-level
// hiddens), one conv+pool block, and a tanh projection; accumulated over the
// messages by an LSTM.
class SmnEncoder {
 public:
  struct Utterance {
    ad::Var embedded;  // [T x e], zero rows past the utterance
    ad::Var hidden;    // [T x h]
  };

  SmnEncoder(ParamStore& store, const SmnDims& dims, Prng& init);

  const SmnDims& dims() const { return dims_; }
  std::size_t pooled_size() const;

  // Keeps the first T non-PAD ids.
  Utterance encode_utterance(ad::Tape& tape, const IdList& ids, const DropoutSpec& drop) const;
  // Response side of match(), transposed once per response.
  Utterance transposed(const Utterance& response) const;
  ad::Var match(ad::Tape& tape, const Utterance& message, const Utterance& response_t) const;
  ad::Var accumulate(ad::Tape& tape, std::span<const ad::Var> features, const DropoutSpec& drop) const;

 private:
  SmnDims dims_;
  Parameter* embedding_;
  LstmParams word_;
  Parameter* bilinear_;
  Parameter* kernels_;
  Parameter* proj_w_;
  Parameter* proj_b_;
  LstmParams accum_;
};

}  // namespace retrorank
