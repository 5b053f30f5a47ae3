#pragma once

// Reverse-mode differentiation over Tensors. A Tape records every op applied
// to its Vars; graphs are rebuilt per example. Parameter leaves accumulate
// straight into Parameter::grad so several tapes can feed one optimizer step.

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "retrorank/numcore/parameter.hpp"
#include "retrorank/numcore/tensor.hpp"

namespace retrorank::ad {

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  double item() const { return value().item(); }
  // Gradient after backward(); a zero tensor if nothing flowed here.
  const Tensor& grad() const;

 private:
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var param(Parameter& p);
  Var constant(Tensor value);

  // Records an op result. `backward` receives the node id and must add into
  // parents' grads through grad_of(). Throws NumericError on non-finite values.
  Var record(Tensor value, std::span<const Var> parents, BackwardFn backward, const char* op);

  void backward(Var loss);
  // Clears intermediate grads, the grads of parameters this tape touched, and
  // the backward-done flag.
  void zero_grad();

  const Tensor& value(std::uint32_t id) const { return nodes_[id].value; }
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
  // Mutable grad buffer, allocated on first use.
  Tensor& grad_of(std::uint32_t id);
  const Tensor& grad(std::uint32_t id) const;
  const Tensor& grad_upstream(std::uint32_t id) const { return nodes_[id].grad; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    BackwardFn backward;
    bool requires_grad = false;
    bool grad_live = false;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::uint32_t> param_ids_;
  bool backward_done_ = false;
  Tensor empty_grad_;
};

// ---- ops ----------------------------------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var sigmoid(Var a);
Var tanh(Var a);

// [p x q] x [q x r] -> [p x r]
Var matmul(Var a, Var b);
// [r x c] x [c] -> [r]
Var matvec(Var w, Var x);
Var transpose(Var a);
Var reshape(Var a, Shape shape);

// Joins tensors of equal rank whose shapes agree except along `axis`.
Var concat(std::span<const Var> parts, std::size_t axis = 0);
Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t length);

Var sum(Var a);
Var sq_norm(Var a);
Var dot(Var a, Var b);

// Rows of a [n x d] table. PAD (id 0) rows never receive gradient.
Var gather_rows(Var table, std::span<const int> ids);
// Stacks [d] vectors into a [rows x d] matrix, zero-filling rows past the
// inputs. rows must be >= parts.size().
Var stack_rows(std::span<const Var> parts, std::size_t rows);
// [n x d] -> [rows x d], zero rows appended. rows must be >= n.
Var pad_rows(Var a, std::size_t rows);

// Zero-padded (1 each side) 3x3 convolution then 2x2/stride-2 max-pool.
// input [c x h x w], kernels [f x c x 3 x 3] -> [f x ceil(h/2) x ceil(w/2)].
Var conv2d_maxpool(Var input, Var kernels);

// Binary cross-entropy of sigmoid(logit) against label, computed from the
// logit: max(z,0) - z*y + log1p(exp(-|z|)).
Var bce_with_logits(Var logit, double label);

// Scalar numeric helpers shared with tests.
double stable_sigmoid(double x);

}  // namespace retrorank::ad
