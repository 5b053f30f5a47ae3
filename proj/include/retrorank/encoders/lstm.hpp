#pragma once

#include <string>
#include <vector>

#include "retrorank/numcore/autodiff.hpp"
#include "retrorank/numcore/parameter.hpp"
#include "retrorank/numcore/prng.hpp"

namespace retrorank {

// Gate blocks are stacked in the order input, forget, cell, output:
// w [4H x D], u [4H x H], b [4H].
struct LstmParams {
  Parameter* w = nullptr;
  Parameter* u = nullptr;
  Parameter* b = nullptr;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
};

// Uniform(-0.05, 0.05) weights, zero biases except the forget block at 1.
LstmParams make_lstm(ParamStore& store, const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim,
                     Prng& init);

struct LstmState {
  Tensor h;
  Tensor c;
};

// One step of the standard cell on plain tensors.
LstmState lstm_step(const LstmParams& params, const Tensor& x, const Tensor& h_prev, const Tensor& c_prev);

// Runs the cell from a zero state over the rows of `inputs` [n x D] and
// returns every hidden state [n x H]. Backward is full BPTT in one node.
ad::Var lstm_sequence(ad::Var inputs, ad::Var w, ad::Var u, ad::Var b);

// Final hidden state [H] of lstm_sequence; zeros when `inputs` is null.
ad::Var lstm_final(ad::Tape& tape, const LstmParams& params, const ad::Var* inputs);

// Row `row` of a [n x d] matrix as a [d] vector.
ad::Var row_vector(ad::Var matrix, std::size_t row);

}  // namespace retrorank
