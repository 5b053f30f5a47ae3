#include "retrorank/numcore/autodiff.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "retrorank/numcore/errors.hpp"
#include "retrorank/numcore/kernels.hpp"

namespace retrorank::ad {

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad_of(id_); }

Var Tape::param(Parameter& p) {
  if (auto it = param_ids_.find(&p); it != param_ids_.end()) return Var(this, it->second);
  Node n;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
  param_ids_.emplace(&p, id);
  return Var(this, id);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::record(Tensor value, std::span<const Var> parents, BackwardFn backward, const char* op) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op + " " + shape_string(value.shape()));
  }
  Node n;
  n.value = std::move(value);
  for (const Var& p : parents) {
    if (&p.tape() != this) throw GraphError(std::string(op) + ": operands belong to different tapes");
    n.requires_grad = n.requires_grad || nodes_[p.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Tensor& Tape::grad_of(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.param) return n.param->grad;
  if (!n.grad_live) {
    n.grad = Tensor(n.value.shape(), 0.0);
    n.grad_live = true;
  }
  return n.grad;
}

const Tensor& Tape::grad(std::uint32_t id) const {
  const Node& n = nodes_[id];
  if (n.param) return n.param->grad;
  return n.grad_live ? n.grad : empty_grad_;
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw GraphError("backward: loss belongs to a different tape");
  if (loss.value().size() != 1) {
    throw GraphError("backward requires a scalar loss, got shape " + shape_string(loss.shape()));
  }
  if (backward_done_) throw GraphError("backward called twice without zero_grad");
  backward_done_ = true;
  grad_of(loss.id())[0] += 1.0;
  for (std::int64_t id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad || !n.backward || !n.grad_live) continue;
    n.backward(*this, static_cast<std::uint32_t>(id));
  }
}

void Tape::zero_grad() {
  for (Node& n : nodes_) {
    if (n.param) {
      n.param->grad.fill(0.0);
    } else {
      n.grad = Tensor();
      n.grad_live = false;
    }
  }
  backward_done_ = false;
}

// ---- ops ----------------------------------------------------------------

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

void require_rank(const Var& a, std::size_t rank, const char* op) {
  if (a.value().rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(a.shape()));
  }
}

// Adds `g` into the grad of `id` when that node needs it.
void accumulate(Tape& t, std::uint32_t id, const Tensor& g) {
  if (!t.requires_grad(id)) return;
  Tensor& dst = t.grad_of(id);
  kernels::active().axpy(1.0, g.raw(), dst.raw(), g.size());
}

}  // namespace

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  kernels::active().axpy(1.0, b.value().raw(), out.raw(), out.size());
  const Var ps[] = {a, b};
  return a.tape().record(std::move(out), ps, [ia = a.id(), ib = b.id()](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad_upstream(self);
    accumulate(t, ia, g);
    accumulate(t, ib, g);
  }, "add");
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  kernels::active().axpy(-1.0, b.value().raw(), out.raw(), out.size());
  const Var ps[] = {a, b};
  return a.tape().record(std::move(out), ps, [ia = a.id(), ib = b.id()](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad_upstream(self);
    accumulate(t, ia, g);
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_of(ib);
      kernels::active().axpy(-1.0, g.raw(), gb.raw(), g.size());
    }
  }, "sub");
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape(), 0.0);
  kernels::active().mul_acc(a.value().raw(), b.value().raw(), out.raw(), out.size());
  const Var ps[] = {a, b};
  return a.tape().record(std::move(out), ps, [ia = a.id(), ib = b.id()](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad_upstream(self);
    const auto& k = kernels::active();
    if (t.requires_grad(ia)) k.mul_acc(g.raw(), t.value(ib).raw(), t.grad_of(ia).raw(), g.size());
    if (t.requires_grad(ib)) k.mul_acc(g.raw(), t.value(ia).raw(), t.grad_of(ib).raw(), g.size());
  }, "mul");
}

Var scale(Var a, double s) {
  Tensor out(a.shape(), 0.0);
  kernels::active().axpy(s, a.value().raw(), out.raw(), out.size());
  const Var ps[] = {a};
  return a.tape().record(std::move(out), ps, [ia = a.id(), s](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad_upstream(self);
    if (t.requires_grad(ia)) kernels::active().axpy(s, g.raw(), t.grad_of(ia).raw(), g.size());
  }, "scale");
}

Var sigmoid(Var a) {
  Tensor out = a.value();
  for (double& v : out.data()) v = stable_sigmoid(v);
  const Var ps[] = {a};
  return a.tape().record(std::move(out), ps, [ia = a.id()](Tape& t, std::uint32_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad_upstream(self);
    const Tensor& y = t.value(self);
    Tensor& ga = t.grad_of(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  }, "sigmoid");
}

Var tanh(Var a) {
  Tensor out = a.value();
  for (double& v : out.data()) v = std::tanh(v);
  const Var ps[] = {a};
  return a.tape().record(std::move(out), ps, [ia = a.id()](Tape& t, std::uint32_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad_upstream(self);
    const Tensor& y = t.value(self);
    Tensor& ga = t.grad_of(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  }, "tanh");
}

Var matmul(Var a, Var b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t p = a.shape()[0], q = a.shape()[1], r = b.shape()[1];
  if (b.shape()[0] != q) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  const auto& k = kernels::active();
  Tensor out(Shape{p, r}, 0.0);
  const double* A = a.value().raw();
  const double* B = b.value().raw();
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < q; ++j) k.axpy(A[i * q + j], B + j * r, out.raw() + i * r, r);
  }
  const Var ps[] = {a, b};
  return a.tape().record(std::move(out), ps, [ia = a.id(), ib = b.id(), p, q, r](Tape& t, std::uint32_t self) {
    const auto& k = kernels::active();
    const Tensor& g = t.grad_upstream(self);
    const double* A = t.value(ia).raw();
    const double* B = t.value(ib).raw();
    if (t.requires_grad(ia)) {
      double* gA = t.grad_of(ia).raw();
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < q; ++j) gA[i * q + j] += k.dot(g.raw() + i * r, B + j * r, r);
      }
    }
    if (t.requires_grad(ib)) {
      double* gB = t.grad_of(ib).raw();
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < q; ++j) k.axpy(A[i * q + j], g.raw() + i * r, gB + j * r, r);
      }
    }
  }, "matmul");
}

Var matvec(Var w, Var x) {
  require_rank(w, 2, "matvec");
  require_rank(x, 1, "matvec");
  const std::size_t rows = w.shape()[0], cols = w.shape()[1];
  if (x.shape()[0] != cols) {
    throw DimensionError("matvec: dimensions disagree, " + shape_string(w.shape()) + " x " + shape_string(x.shape()));
  }
  Tensor out(Shape{rows}, 0.0);
  kernels::active().gemv(w.value().raw(), x.value().raw(), out.raw(), rows, cols);
  const Var ps[] = {w, x};
  return w.tape().record(std::move(out), ps, [iw = w.id(), ix = x.id(), rows, cols](Tape& t, std::uint32_t self) {
    const auto& k = kernels::active();
    const Tensor& g = t.grad_upstream(self);
    if (t.requires_grad(iw)) {
      double* gW = t.grad_of(iw).raw();
      const double* X = t.value(ix).raw();
      for (std::size_t r = 0; r < rows; ++r) {
        if (g[r] != 0.0) k.axpy(g[r], X, gW + r * cols, cols);
      }
    }
    if (t.requires_grad(ix)) {
      double* gx = t.grad_of(ix).raw();
      const double* W = t.value(iw).raw();
      for (std::size_t r = 0; r < rows; ++r) {
        if (g[r] != 0.0) k.axpy(g[r], W + r * cols, gx, cols);
      }
    }
  }, "matvec");
}

Var transpose(Var a) {
  require_rank(a, 2, "transpose");
  const std::size_t rows = a.shape()[0], cols = a.shape()[1];
  Tensor out(Shape{cols, rows}, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out.at(j, i) = a.value().at(i, j);
  }
  const Var ps[] = {a};
  return a.tape().record(std::move(out), ps, [ia = a.id(), rows, cols](Tape& t, std::uint32_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad_upstream(self);
    Tensor& ga = t.grad_of(ia);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) ga.at(i, j) += g.at(j, i);
    }
  }, "transpose");
}

Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  const Var ps[] = {a};
  return a.tape().record(std::move(out), ps, [ia = a.id()](Tape& t, std::uint32_t self) {
    accumulate(t, ia, t.grad_upstream(self));
  }, "reshape");
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) throw DimensionError("concat: axis out of range for " + shape_string(first));
  std::size_t total = 0;
  for (const Var& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == axis || s[d] == first[d];
    if (!ok) throw DimensionError("concat: shape mismatch " + shape_string(first) + " vs " + shape_string(s));
    total += s[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];
  Shape out_shape = first;
  out_shape[axis] = total;
  Tensor out(out_shape, 0.0);
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> widths;
  for (const Var& p : parts) {
    ids.push_back(p.id());
    widths.push_back(p.shape()[axis] * inner);
  }
  const std::size_t row = total * inner;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const double* src = parts[k].value().raw();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy(src + o * widths[k], src + (o + 1) * widths[k], out.raw() + o * row + offset);
    }
    offset += widths[k];
  }
  return parts[0].tape().record(std::move(out), parts, [ids, widths, outer, row](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad_upstream(self);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.requires_grad(ids[k])) {
        double* dst = t.grad_of(ids[k]).raw();
        for (std::size_t o = 0; o < outer; ++o) {
          kernels::active().axpy(1.0, g.raw() + o * row + offset, dst + o * widths[k], widths[k]);
        }
      }
      offset += widths[k];
    }
  }, "concat");
}

Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t length) {
  const Shape& s = a.shape();
  if (axis >= s.size() || length == 0 || begin + length > s[axis]) {
    throw DimensionError("slice: [" + std::to_string(begin) + ", " + std::to_string(begin + length) +
                         ") out of range on axis " + std::to_string(axis) + " of " + shape_string(s));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= s[d];
  for (std::size_t d = axis + 1; d < s.size(); ++d) inner *= s[d];
  Shape out_shape = s;
  out_shape[axis] = length;
  Tensor out(out_shape, 0.0);
  const std::size_t src_row = s[axis] * inner, dst_row = length * inner, start = begin * inner;
  const double* src = a.value().raw();
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy(src + o * src_row + start, src + o * src_row + start + dst_row, out.raw() + o * dst_row);
  }
  const Var ps[] = {a};
  return a.tape().record(std::move(out), ps, [ia = a.id(), outer, src_row, dst_row, start](Tape& t, std::uint32_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad_upstream(self);
    double* dst = t.grad_of(ia).raw();
    for (std::size_t o = 0; o < outer; ++o) {
      kernels::active().axpy(1.0, g.raw() + o * dst_row, dst + o * src_row + start, dst_row);
    }
  }, "slice");
}

Var sum(Var a) {
  double acc = 0.0;
  for (double v : a.value().data()) acc += v;
  const Var ps[] = {a};
  return a.tape().record(Tensor::scalar(acc), ps, [ia = a.id()](Tape& t, std::uint32_t self) {
    if (!t.requires_grad(ia)) return;
    const double g = t.grad_upstream(self)[0];
    for (double& v : t.grad_of(ia).data()) v += g;
  }, "sum");
}

Var sq_norm(Var a) {
  const Tensor& x = a.value();
  const double acc = kernels::active().dot(x.raw(), x.raw(), x.size());
  const Var ps[] = {a};
  return a.tape().record(Tensor::scalar(acc), ps, [ia = a.id()](Tape& t, std::uint32_t self) {
    if (!t.requires_grad(ia)) return;
    const double g = t.grad_upstream(self)[0];
    const Tensor& x = t.value(ia);
    kernels::active().axpy(2.0 * g, x.raw(), t.grad_of(ia).raw(), x.size());
  }, "sq_norm");
}

Var dot(Var a, Var b) {
  require_same_shape(a, b, "dot");
  const double acc = kernels::active().dot(a.value().raw(), b.value().raw(), a.value().size());
  const Var ps[] = {a, b};
  return a.tape().record(Tensor::scalar(acc), ps, [ia = a.id(), ib = b.id()](Tape& t, std::uint32_t self) {
    const double g = t.grad_upstream(self)[0];
    const auto& k = kernels::active();
    const std::size_t n = t.value(ia).size();
    if (t.requires_grad(ia)) k.axpy(g, t.value(ib).raw(), t.grad_of(ia).raw(), n);
    if (t.requires_grad(ib)) k.axpy(g, t.value(ia).raw(), t.grad_of(ib).raw(), n);
  }, "dot");
}

Var gather_rows(Var table, std::span<const int> ids) {
  require_rank(table, 2, "gather_rows");
  if (ids.empty()) throw DimensionError("gather_rows: no ids");
  const std::size_t n = table.shape()[0], d = table.shape()[1];
  Tensor out(Shape{ids.size(), d}, 0.0);
  const double* src = table.value().raw();
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= n) {
      throw DimensionError("gather_rows: id " + std::to_string(ids[r]) + " outside table of " + std::to_string(n) +
                           " rows");
    }
    std::copy(src + ids[r] * d, src + (ids[r] + 1) * d, out.raw() + r * d);
  }
  const Var ps[] = {table};
  std::vector<int> saved(ids.begin(), ids.end());
  return table.tape().record(std::move(out), ps, [it = table.id(), saved = std::move(saved), d](Tape& t, std::uint32_t self) {
    if (!t.requires_grad(it)) return;
    const Tensor& g = t.grad_upstream(self);
    double* dst = t.grad_of(it).raw();
    for (std::size_t r = 0; r < saved.size(); ++r) {
      if (saved[r] == 0) continue;
      kernels::active().axpy(1.0, g.raw() + r * d, dst + saved[r] * d, d);
    }
  }, "gather_rows");
}

Var stack_rows(std::span<const Var> parts, std::size_t rows) {
  if (parts.empty()) throw DimensionError("stack_rows: no inputs");
  if (rows < parts.size()) {
    throw DimensionError("stack_rows: " + std::to_string(parts.size()) + " rows do not fit in " + std::to_string(rows));
  }
  const Shape& first = parts[0].shape();
  if (first.size() != 1) throw DimensionError("stack_rows: expected vectors, got " + shape_string(first));
  const std::size_t d = first[0];
  Tensor out(Shape{rows, d}, 0.0);
  std::vector<std::uint32_t> ids;
  for (std::size_t r = 0; r < parts.size(); ++r) {
    if (parts[r].shape() != first) {
      throw DimensionError("stack_rows: shape mismatch " + shape_string(first) + " vs " + shape_string(parts[r].shape()));
    }
    std::copy(parts[r].value().raw(), parts[r].value().raw() + d, out.raw() + r * d);
    ids.push_back(parts[r].id());
  }
  return parts[0].tape().record(std::move(out), parts, [ids, d](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad_upstream(self);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (t.requires_grad(ids[r])) kernels::active().axpy(1.0, g.raw() + r * d, t.grad_of(ids[r]).raw(), d);
    }
  }, "stack_rows");
}

Var pad_rows(Var a, std::size_t rows) {
  require_rank(a, 2, "pad_rows");
  const std::size_t n = a.shape()[0], d = a.shape()[1];
  if (rows < n) throw DimensionError("pad_rows: " + std::to_string(n) + " rows do not fit in " + std::to_string(rows));
  Tensor out(Shape{rows, d}, 0.0);
  std::copy(a.value().raw(), a.value().raw() + n * d, out.raw());
  const Var ps[] = {a};
  return a.tape().record(std::move(out), ps, [ia = a.id(), n, d](Tape& t, std::uint32_t self) {
    if (t.requires_grad(ia)) kernels::active().axpy(1.0, t.grad_upstream(self).raw(), t.grad_of(ia).raw(), n * d);
  }, "pad_rows");
}

Var conv2d_maxpool(Var input, Var kernels_var) {
  require_rank(input, 3, "conv2d_maxpool");
  require_rank(kernels_var, 4, "conv2d_maxpool");
  const Shape& is = input.shape();
  const Shape& ks = kernels_var.shape();
  const std::size_t c = is[0], h = is[1], w = is[2];
  const std::size_t f = ks[0];
  if (ks[1] != c || ks[2] != 3 || ks[3] != 3) {
    throw DimensionError("conv2d_maxpool: kernels " + shape_string(ks) + " incompatible with input " + shape_string(is));
  }
  const std::size_t ph = h + 2, pw = w + 2;
  const std::size_t oh = (h + 1) / 2, ow = (w + 1) / 2;
  const auto& k = kernels::active();

  // Zero-padded copy of the input.
  std::vector<double> padded(c * ph * pw, 0.0);
  const double* in = input.value().raw();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h; ++y) {
      std::copy(in + (ch * h + y) * w, in + (ch * h + y + 1) * w, padded.data() + (ch * ph + y + 1) * pw + 1);
    }
  }
  // conv[f][y][x] = sum_{ch,ky,kx} K[f][ch][ky][kx] * P[ch][y+ky][x+kx]
  std::vector<double> conv(f * h * w, 0.0);
  const double* K = kernels_var.value().raw();
  for (std::size_t fi = 0; fi < f; ++fi) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t ky = 0; ky < 3; ++ky) {
        for (std::size_t kx = 0; kx < 3; ++kx) {
          const double kv = K[((fi * c + ch) * 3 + ky) * 3 + kx];
          if (kv == 0.0) continue;
          for (std::size_t y = 0; y < h; ++y) {
            k.axpy(kv, padded.data() + (ch * ph + y + ky) * pw + kx, conv.data() + (fi * h + y) * w, w);
          }
        }
      }
    }
  }
  Tensor out(Shape{f, oh, ow}, 0.0);
  std::vector<std::uint32_t> argmax(f * oh * ow);
  for (std::size_t fi = 0; fi < f; ++fi) {
    for (std::size_t py = 0; py < oh; ++py) {
      for (std::size_t px = 0; px < ow; ++px) {
        double best = -std::numeric_limits<double>::infinity();
        std::uint32_t best_at = 0;
        for (std::size_t y = 2 * py; y < std::min(2 * py + 2, h); ++y) {
          for (std::size_t x = 2 * px; x < std::min(2 * px + 2, w); ++x) {
            const std::size_t at = (fi * h + y) * w + x;
            if (conv[at] > best) {
              best = conv[at];
              best_at = static_cast<std::uint32_t>(at);
            }
          }
        }
        const std::size_t o = (fi * oh + py) * ow + px;
        out[o] = best;
        argmax[o] = best_at;
      }
    }
  }
  const Var ps[] = {input, kernels_var};
  return input.tape().record(
      std::move(out), ps,
      [ii = input.id(), ik = kernels_var.id(), padded = std::move(padded), argmax = std::move(argmax), c, h, w, f, ph,
       pw](Tape& t, std::uint32_t self) {
        const auto& k = kernels::active();
        const Tensor& g = t.grad_upstream(self);
        std::vector<double> dconv(f * h * w, 0.0);
        for (std::size_t o = 0; o < argmax.size(); ++o) dconv[argmax[o]] += g[o];
        const double* K = t.value(ik).raw();
        if (t.requires_grad(ik)) {
          double* gK = t.grad_of(ik).raw();
          for (std::size_t fi = 0; fi < f; ++fi) {
            for (std::size_t ch = 0; ch < c; ++ch) {
              for (std::size_t ky = 0; ky < 3; ++ky) {
                for (std::size_t kx = 0; kx < 3; ++kx) {
                  double acc = 0.0;
                  for (std::size_t y = 0; y < h; ++y) {
                    acc += k.dot(dconv.data() + (fi * h + y) * w, padded.data() + (ch * ph + y + ky) * pw + kx, w);
                  }
                  gK[((fi * c + ch) * 3 + ky) * 3 + kx] += acc;
                }
              }
            }
          }
        }
        if (t.requires_grad(ii)) {
          std::vector<double> dpad(c * ph * pw, 0.0);
          for (std::size_t fi = 0; fi < f; ++fi) {
            for (std::size_t ch = 0; ch < c; ++ch) {
              for (std::size_t ky = 0; ky < 3; ++ky) {
                for (std::size_t kx = 0; kx < 3; ++kx) {
                  const double kv = K[((fi * c + ch) * 3 + ky) * 3 + kx];
                  if (kv == 0.0) continue;
                  for (std::size_t y = 0; y < h; ++y) {
                    k.axpy(kv, dconv.data() + (fi * h + y) * w, dpad.data() + (ch * ph + y + ky) * pw + kx, w);
                  }
                }
              }
            }
          }
          double* gi = t.grad_of(ii).raw();
          for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t y = 0; y < h; ++y) {
              k.axpy(1.0, dpad.data() + (ch * ph + y + 1) * pw + 1, gi + (ch * h + y) * w, w);
            }
          }
        }
      },
      "conv2d_maxpool");
}

Var bce_with_logits(Var logit, double label) {
  if (logit.value().size() != 1) throw DimensionError("bce_with_logits: logit must be scalar");
  const double z = logit.item();
  const double loss = std::max(z, 0.0) - z * label + std::log1p(std::exp(-std::abs(z)));
  const Var ps[] = {logit};
  return logit.tape().record(Tensor::scalar(loss), ps, [iz = logit.id(), label](Tape& t, std::uint32_t self) {
    if (!t.requires_grad(iz)) return;
    const double g = t.grad_upstream(self)[0];
    const double z = t.value(iz)[0];
    t.grad_of(iz)[0] += g * (stable_sigmoid(z) - label);
  }, "bce_with_logits");
}

}  // namespace retrorank::ad
