#pragma once

#include <cstdint>

#include "retrorank/numcore/gradcheck.hpp"
#include "retrorank/scoring/model.hpp"

namespace retrorank {

struct GradSuiteOptions {
  ModelKind kind = ModelKind::LstmDe;
  // embed = hidden = p = q
  std::size_t dims = 4;
  // false: identity-only plan; true: 2x2 flip plan on contexts and responses.
  bool augmented = false;
  double t = 0.1;
  std::uint64_t seed = 7;
};

// Finite-difference check of the full training loss (bce + regularizer) over
// a few labelled synthetic pairs, every parameter included.
GradCheckReport run_grad_suite(const GradSuiteOptions& options);

}  // namespace retrorank
