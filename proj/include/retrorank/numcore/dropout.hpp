#pragma once

#include "retrorank/numcore/autodiff.hpp"
#include "retrorank/numcore/prng.hpp"

namespace retrorank {

enum class Mode { Train, Eval };

// Inverted dropout: in Train mode each element is zeroed with probability
// `rate` and survivors are scaled by 1/(1-rate). Eval mode is the identity.
// One uniform draw per element, in element order.
Tensor dropout_mask(const Shape& shape, double rate, Prng& rng);
Tensor dropout_apply(const Tensor& x, double rate, Prng& rng, Mode mode);

struct DropoutSpec {
  double rate = 0.0;
  Mode mode = Mode::Eval;
  Prng* rng = nullptr;

  bool active() const { return mode == Mode::Train && rate > 0.0 && rng != nullptr; }
};

ad::Var dropout(ad::Var x, const DropoutSpec& spec);

}  // namespace retrorank
