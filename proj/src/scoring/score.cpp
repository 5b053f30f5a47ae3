#include "retrorank/scoring/score.hpp"

#include <string>

#include "retrorank/numcore/errors.hpp"

namespace retrorank {

namespace {

std::string pair_name(const ViewPair& p) {
  return "(" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}

ad::Var add_term(const ad::Var& total, ad::Var term) { return total.valid() ? ad::add(total, term) : term; }

template <typename F>
double with_tape(F&& build) {
  ad::Tape tape;
  return ad::stable_sigmoid(build(tape).item());
}

}  // namespace

ad::Var de_logit(ad::Var v_m, ad::Var m, ad::Var v_r) {
  if (m.value().rank() != 2 || v_m.value().rank() != 1 || v_r.value().rank() != 1 || m.shape()[0] != v_m.shape()[0] ||
      m.shape()[1] != v_r.shape()[0]) {
    throw DimensionError("de_logit: " + shape_string(v_m.shape()) + "^T " + shape_string(m.shape()) + " " +
                         shape_string(v_r.shape()));
  }
  return ad::dot(v_m, ad::matvec(m, v_r));
}

ad::Var smn_logit(ad::Var v_mr, ad::Var w) {
  if (v_mr.shape() != w.shape() || w.value().rank() != 1) {
    throw DimensionError("smn_logit: " + shape_string(w.shape()) + " vs " + shape_string(v_mr.shape()));
  }
  return ad::dot(w, v_mr);
}

ad::Var combined_de_logit(std::span<const ad::Var> views_m, std::span<const ad::Var> views_r,
                          const std::map<ViewPair, ad::Var>& weights) {
  if (weights.empty()) throw DimensionError("combined_de_logit: no view pairs");
  ad::Var total;
  for (const auto& [pair, m] : weights) {
    if (pair.first >= views_m.size() || pair.second >= views_r.size()) {
      throw DimensionError("combined_de_logit: missing encoding for pair " + pair_name(pair));
    }
    total = add_term(total, de_logit(views_m[pair.first], m, views_r[pair.second]));
  }
  return total;
}

ad::Var combined_smn_logit(const std::map<ViewPair, ad::Var>& encodings, const std::map<ViewPair, ad::Var>& weights) {
  if (weights.empty()) throw DimensionError("combined_smn_logit: no view pairs");
  ad::Var total;
  for (const auto& [pair, w] : weights) {
    auto it = encodings.find(pair);
    if (it == encodings.end()) throw DimensionError("combined_smn_logit: missing encoding for pair " + pair_name(pair));
    total = add_term(total, smn_logit(it->second, w));
  }
  return total;
}

double score_de(const Tensor& v_m, const Tensor& v_r, const Tensor& m) {
  return with_tape([&](ad::Tape& t) { return de_logit(t.constant(v_m), t.constant(m), t.constant(v_r)); });
}

double score_smn(const Tensor& v_mr, const Tensor& w) {
  return with_tape([&](ad::Tape& t) { return smn_logit(t.constant(v_mr), t.constant(w)); });
}

double combined_score_de(std::span<const Tensor> views_m, std::span<const Tensor> views_r,
                         const std::map<ViewPair, Tensor>& weights) {
  return with_tape([&](ad::Tape& t) {
    std::vector<ad::Var> vm, vr;
    for (const Tensor& v : views_m) vm.push_back(t.constant(v));
    for (const Tensor& v : views_r) vr.push_back(t.constant(v));
    std::map<ViewPair, ad::Var> w;
    for (const auto& [p, m] : weights) w.emplace(p, t.constant(m));
    return combined_de_logit(vm, vr, w);
  });
}

double combined_score_smn(const std::map<ViewPair, Tensor>& encodings, const std::map<ViewPair, Tensor>& weights) {
  return with_tape([&](ad::Tape& t) {
    std::map<ViewPair, ad::Var> e, w;
    for (const auto& [p, v] : encodings) e.emplace(p, t.constant(v));
    for (const auto& [p, v] : weights) w.emplace(p, t.constant(v));
    return combined_smn_logit(e, w);
  });
}

}  // namespace retrorank
