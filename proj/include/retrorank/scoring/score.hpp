#pragma once

#include <map>
#include <span>
#include <utility>

#include "retrorank/numcore/autodiff.hpp"

namespace retrorank {

// (context transform index i, response transform index j)
using ViewPair = std::pair<std::size_t, std::size_t>;

// Logit forms. All probabilities are sigmoid(logit).
ad::Var de_logit(ad::Var v_m, ad::Var m, ad::Var v_r);  // v_m^T M v_r
ad::Var smn_logit(ad::Var v_mr, ad::Var w);             // w^T v_mr

// Sum over the pairs of `weights`, in (i, j) order. A single pair reduces
// exactly to the base form.
ad::Var combined_de_logit(std::span<const ad::Var> views_m, std::span<const ad::Var> views_r,
                          const std::map<ViewPair, ad::Var>& weights);
ad::Var combined_smn_logit(const std::map<ViewPair, ad::Var>& encodings, const std::map<ViewPair, ad::Var>& weights);

// Plain-tensor probabilities.
double score_de(const Tensor& v_m, const Tensor& v_r, const Tensor& m);
double score_smn(const Tensor& v_mr, const Tensor& w);
double combined_score_de(std::span<const Tensor> views_m, std::span<const Tensor> views_r,
                         const std::map<ViewPair, Tensor>& weights);
double combined_score_smn(const std::map<ViewPair, Tensor>& encodings, const std::map<ViewPair, Tensor>& weights);

}  // namespace retrorank
