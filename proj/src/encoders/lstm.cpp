#include "retrorank/encoders/lstm.hpp"

#include <cmath>
#include <memory>

#include "retrorank/numcore/errors.hpp"
#include "retrorank/numcore/kernels.hpp"

namespace retrorank {

namespace {

Tensor uniform_tensor(Shape shape, Prng& rng) {
  Tensor t(std::move(shape), 0.0);
  for (double& v : t.data()) v = rng.uniform(-0.05, 0.05);
  return t;
}

double sigm(double x) { return ad::stable_sigmoid(x); }

// Saved activations for the backward pass, all [n x H] (gates [n x 4H]).
struct SequenceCache {
  std::size_t n = 0, d = 0, h = 0;
  std::vector<double> gates;
  std::vector<double> cells;
  std::vector<double> cell_tanh;
};

}  // namespace

LstmParams make_lstm(ParamStore& store, const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim,
                     Prng& init) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w = &store.add(prefix + ".w", uniform_tensor(Shape{4 * hidden_dim, input_dim}, init));
  p.u = &store.add(prefix + ".u", uniform_tensor(Shape{4 * hidden_dim, hidden_dim}, init));
  Tensor bias(Shape{4 * hidden_dim}, 0.0);
  for (std::size_t k = hidden_dim; k < 2 * hidden_dim; ++k) bias[k] = 1.0;
  p.b = &store.add(prefix + ".b", std::move(bias));
  return p;
}

LstmState lstm_step(const LstmParams& params, const Tensor& x, const Tensor& h_prev, const Tensor& c_prev) {
  const std::size_t d = params.input_dim, h = params.hidden_dim;
  if (x.size() != d || h_prev.size() != h || c_prev.size() != h) {
    throw DimensionError("lstm_step: expected x[" + std::to_string(d) + "], h/c[" + std::to_string(h) + "], got " +
                         shape_string(x.shape()) + ", " + shape_string(h_prev.shape()) + ", " +
                         shape_string(c_prev.shape()));
  }
  const auto& k = kernels::active();
  std::vector<double> a(4 * h), tmp(4 * h);
  k.gemv(params.w->value.raw(), x.raw(), a.data(), 4 * h, d);
  k.gemv(params.u->value.raw(), h_prev.raw(), tmp.data(), 4 * h, h);
  LstmState out{Tensor(Shape{h}, 0.0), Tensor(Shape{h}, 0.0)};
  for (std::size_t j = 0; j < h; ++j) {
    auto pre = [&](std::size_t block) { return a[block * h + j] + tmp[block * h + j] + params.b->value[block * h + j]; };
    const double i = sigm(pre(0)), f = sigm(pre(1)), g = std::tanh(pre(2)), o = sigm(pre(3));
    out.c[j] = f * c_prev[j] + i * g;
    out.h[j] = o * std::tanh(out.c[j]);
  }
  return out;
}

ad::Var lstm_sequence(ad::Var inputs, ad::Var w, ad::Var u, ad::Var b) {
  if (inputs.value().rank() != 2) throw DimensionError("lstm_sequence: inputs must be [n x D], got " + shape_string(inputs.shape()));
  const std::size_t n = inputs.shape()[0], d = inputs.shape()[1];
  const std::size_t h = u.shape().size() == 2 ? u.shape()[1] : 0;
  if (w.shape() != Shape{4 * h, d} || u.shape() != Shape{4 * h, h} || b.shape() != Shape{4 * h}) {
    throw DimensionError("lstm_sequence: parameter shapes " + shape_string(w.shape()) + ", " + shape_string(u.shape()) +
                         ", " + shape_string(b.shape()) + " do not fit inputs " + shape_string(inputs.shape()));
  }
  const auto& k = kernels::active();
  auto cache = std::make_shared<SequenceCache>();
  cache->n = n;
  cache->d = d;
  cache->h = h;
  cache->gates.assign(n * 4 * h, 0.0);
  cache->cells.assign(n * h, 0.0);
  cache->cell_tanh.assign(n * h, 0.0);
  Tensor out(Shape{n, h}, 0.0);
  const double* X = inputs.value().raw();
  const double* W = w.value().raw();
  const double* U = u.value().raw();
  const double* B = b.value().raw();
  std::vector<double> rec(4 * h);
  for (std::size_t t = 0; t < n; ++t) {
    double* a = cache->gates.data() + t * 4 * h;
    k.gemv(W, X + t * d, a, 4 * h, d);
    if (t > 0) {
      k.gemv(U, out.raw() + (t - 1) * h, rec.data(), 4 * h, h);
      k.axpy(1.0, rec.data(), a, 4 * h);
    }
    k.axpy(1.0, B, a, 4 * h);
    for (std::size_t j = 0; j < h; ++j) {
      const double i = sigm(a[j]), f = sigm(a[h + j]), g = std::tanh(a[2 * h + j]), o = sigm(a[3 * h + j]);
      a[j] = i;
      a[h + j] = f;
      a[2 * h + j] = g;
      a[3 * h + j] = o;
      const double c_prev = t > 0 ? cache->cells[(t - 1) * h + j] : 0.0;
      const double c = f * c_prev + i * g;
      cache->cells[t * h + j] = c;
      cache->cell_tanh[t * h + j] = std::tanh(c);
      out.raw()[t * h + j] = o * cache->cell_tanh[t * h + j];
    }
  }
  const ad::Var ps[] = {inputs, w, u, b};
  return inputs.tape().record(
      std::move(out), ps,
      [ix = inputs.id(), iw = w.id(), iu = u.id(), ib = b.id(), cache](ad::Tape& tp, std::uint32_t self) {
        const auto& k = kernels::active();
        const std::size_t n = cache->n, d = cache->d, h = cache->h;
        const Tensor& g_out = tp.grad_upstream(self);
        const Tensor& hs = tp.value(self);
        const double* X = tp.value(ix).raw();
        const double* W = tp.value(iw).raw();
        const double* U = tp.value(iu).raw();
        double* gX = tp.requires_grad(ix) ? tp.grad_of(ix).raw() : nullptr;
        double* gW = tp.requires_grad(iw) ? tp.grad_of(iw).raw() : nullptr;
        double* gU = tp.requires_grad(iu) ? tp.grad_of(iu).raw() : nullptr;
        double* gB = tp.requires_grad(ib) ? tp.grad_of(ib).raw() : nullptr;
        std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0), da(4 * h);
        for (std::size_t t = n; t-- > 0;) {
          const double* gate = cache->gates.data() + t * 4 * h;
          for (std::size_t j = 0; j < h; ++j) {
            const double i = gate[j], f = gate[h + j], g = gate[2 * h + j], o = gate[3 * h + j];
            const double tc = cache->cell_tanh[t * h + j];
            const double c_prev = t > 0 ? cache->cells[(t - 1) * h + j] : 0.0;
            const double dh = g_out[t * h + j] + dh_next[j];
            const double dc = dc_next[j] + dh * o * (1.0 - tc * tc);
            da[j] = dc * g * i * (1.0 - i);
            da[h + j] = dc * c_prev * f * (1.0 - f);
            da[2 * h + j] = dc * i * (1.0 - g * g);
            da[3 * h + j] = dh * tc * o * (1.0 - o);
            dc_next[j] = dc * f;
          }
          if (gB) k.axpy(1.0, da.data(), gB, 4 * h);
          std::fill(dh_next.begin(), dh_next.end(), 0.0);
          for (std::size_t r = 0; r < 4 * h; ++r) {
            if (da[r] == 0.0) continue;
            if (gW) k.axpy(da[r], X + t * d, gW + r * d, d);
            if (gX) k.axpy(da[r], W + r * d, gX + t * d, d);
            if (t > 0) {
              if (gU) k.axpy(da[r], hs.raw() + (t - 1) * h, gU + r * h, h);
              k.axpy(da[r], U + r * h, dh_next.data(), h);
            }
          }
        }
      },
      "lstm_sequence");
}

ad::Var lstm_final(ad::Tape& tape, const LstmParams& params, const ad::Var* inputs) {
  if (inputs == nullptr) return tape.constant(Tensor(Shape{params.hidden_dim}, 0.0));
  ad::Var hs = lstm_sequence(*inputs, tape.param(*params.w), tape.param(*params.u), tape.param(*params.b));
  return row_vector(hs, hs.shape()[0] - 1);
}

ad::Var row_vector(ad::Var matrix, std::size_t row) {
  const std::size_t d = matrix.shape()[1];
  return ad::reshape(ad::slice(matrix, 0, row, 1), Shape{d});
}

}  // namespace retrorank
