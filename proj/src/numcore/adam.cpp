#include "retrorank/numcore/adam.hpp"

#include <cmath>

#include "retrorank/numcore/errors.hpp"

namespace retrorank {

AdamState make_adam_state(const ParamStore& params, double learning_rate) {
  AdamState state;
  state.learning_rate = learning_rate;
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.first_moment.emplace_back(params[i].value.shape(), 0.0);
    state.second_moment.emplace_back(params[i].value.shape(), 0.0);
  }
  return state;
}

void adam_step(ParamStore& params, AdamState& state) {
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw DimensionError("Adam state tracks " + std::to_string(state.first_moment.size()) + " tensors, store has " +
                         std::to_string(params.size()));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = params[k];
    Tensor& m = state.first_moment[k];
    Tensor& v = state.second_moment[k];
    if (m.shape() != p.value.shape() || v.shape() != p.value.shape() || p.grad.shape() != p.value.shape()) {
      throw DimensionError("Adam shape mismatch for '" + p.name + "': param " + shape_string(p.value.shape()) +
                           ", grad " + shape_string(p.grad.shape()) + ", moment " + shape_string(m.shape()));
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.value[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

}  // namespace retrorank
