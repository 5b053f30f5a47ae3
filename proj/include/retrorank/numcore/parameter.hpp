#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "retrorank/numcore/tensor.hpp"

namespace retrorank {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Owns named parameters with stable addresses, in creation order.
class ParamStore {
 public:
  Parameter& add(std::string name, Tensor init);
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad();
  std::size_t scalar_count() const;

  // Snapshot/restore of values only (grads untouched).
  std::vector<Tensor> values() const;
  void set_values(const std::vector<Tensor>& values);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

}  // namespace retrorank
