#include "retrorank/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace retrorank {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport check_gradients(ParamStore& params, const std::function<ad::Var(ad::Tape&)>& loss, double step,
                                double floor) {
  params.zero_grad();
  {
    ad::Tape tape;
    ad::Var l = loss(tape);
    tape.backward(l);
  }
  std::vector<Tensor> analytic;
  for (std::size_t k = 0; k < params.size(); ++k) analytic.push_back(params[k].grad);

  auto eval = [&] {
    ad::Tape tape;
    return loss(tape).item();
  };

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = params[k];
    GradCheckEntry worst{p.name, 0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + step;
      const double up = eval();
      p.value[i] = saved - step;
      const double down = eval();
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double rel = relative_error(analytic[k][i], numeric, floor);
      ++report.checked;
      if (rel >= worst.rel_error) worst = GradCheckEntry{p.name, i, analytic[k][i], numeric, rel};
    }
    if (worst.rel_error >= report.max_rel_error) {
      report.max_rel_error = worst.rel_error;
      report.worst = worst;
    }
    report.per_param.push_back(worst);
  }
  params.zero_grad();
  return report;
}

}  // namespace retrorank
