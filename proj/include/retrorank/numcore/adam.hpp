#pragma once

#include <cstdint>
#include <vector>

#include "retrorank/numcore/parameter.hpp"

namespace retrorank {

struct AdamState {
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const ParamStore& params, double learning_rate = 0.001);

// One bias-corrected Adam update of every parameter from its grad.
void adam_step(ParamStore& params, AdamState& state);

}  // namespace retrorank
