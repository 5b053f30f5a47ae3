#include "retrorank/numcore/parameter.hpp"

#include "retrorank/numcore/errors.hpp"

namespace retrorank {

Parameter& ParamStore::add(std::string name, Tensor init) {
  if (find(name)) throw Error("duplicate parameter name '" + name + "'");
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->grad = Tensor(init.shape(), 0.0);
  p->value = std::move(init);
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParamStore::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter* ParamStore::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

Parameter& ParamStore::get(std::string_view name) {
  if (Parameter* p = find(name)) return *p;
  throw Error("unknown parameter '" + std::string(name) + "'");
}

const Parameter& ParamStore::get(std::string_view name) const {
  if (const Parameter* p = find(name)) return *p;
  throw Error("unknown parameter '" + std::string(name) + "'");
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->grad.fill(0.0);
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

std::vector<Tensor> ParamStore::values() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->value);
  return out;
}

void ParamStore::set_values(const std::vector<Tensor>& values) {
  if (values.size() != params_.size()) throw DimensionError("parameter snapshot count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].shape() != params_[i]->value.shape()) {
      throw DimensionError("parameter '" + params_[i]->name + "' snapshot shape " +
                           shape_string(values[i].shape()) + " != " + shape_string(params_[i]->value.shape()));
    }
    params_[i]->value = values[i];
  }
}

}  // namespace retrorank
