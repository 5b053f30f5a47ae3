#include "retrorank/numcore/dropout.hpp"

#include <string>

#include "retrorank/numcore/errors.hpp"

namespace retrorank {

namespace {

void check_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
}

}  // namespace

Tensor dropout_mask(const Shape& shape, double rate, Prng& rng) {
  check_rate(rate);
  Tensor mask(shape, 0.0);
  const double keep = 1.0 / (1.0 - rate);
  for (double& m : mask.data()) m = rng.uniform() < rate ? 0.0 : keep;
  return mask;
}

Tensor dropout_apply(const Tensor& x, double rate, Prng& rng, Mode mode) {
  check_rate(rate);
  if (mode == Mode::Eval || rate == 0.0) return x;
  Tensor out = dropout_mask(x.shape(), rate, rng);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= x[i];
  return out;
}

ad::Var dropout(ad::Var x, const DropoutSpec& spec) {
  if (!spec.active()) return x;
  return ad::mul(x, x.tape().constant(dropout_mask(x.shape(), spec.rate, *spec.rng)));
}

}  // namespace retrorank
