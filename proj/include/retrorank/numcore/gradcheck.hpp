#pragma once

#include <functional>
#include <string>
#include <vector>

#include "retrorank/numcore/autodiff.hpp"

namespace retrorank {

struct GradCheckEntry {
  std::string param;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  GradCheckEntry worst;
  std::size_t checked = 0;
  // Worst entry per parameter, in store order.
  std::vector<GradCheckEntry> per_param;
};

// |a - n| / max(|a|, |n|, floor). The floor keeps near-zero gradients from
// turning rounding noise into large relative errors.
double relative_error(double analytic, double numeric, double floor = 1e-6);

// Compares the tape gradient of `loss` with central differences
// (f(x+h) - f(x-h)) / 2h for every scalar of every parameter in `params`.
// `loss` must build a fresh graph on the given tape and be deterministic.
GradCheckReport check_gradients(ParamStore& params, const std::function<ad::Var(ad::Tape&)>& loss,
                                double step = 1e-5, double floor = 1e-6);

}  // namespace retrorank
