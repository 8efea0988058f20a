// Copyright 2026 The dansim Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <initializer_list>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "dan/common.hpp"

namespace dan {

class shape_mismatch_error : public error {
 public:
  using error::error;
};
class non_scalar_loss_error : public error {
 public:
  using error::error;
};

// ---------------------------------------------------------------------------
// Dense row-major tensor, double precision. Immutable by convention once it
// enters the graph; parameter values mutate only between recorded graphs.

struct tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  tensor() = default;
  explicit tensor(std::vector<std::size_t> s, double fill = 0.0)
      : shape(std::move(s)), data(numel(shape), fill) {}
  tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != numel(shape))
      throw shape_mismatch_error("data length does not match shape");
  }

  static tensor scalar(double v) { return tensor({1}, std::vector<double>{v}); }

  static std::size_t numel(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  bool same_shape(const tensor& o) const { return shape == o.shape; }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  /// Row-major element access; rank must match the index count.
  double& at(std::initializer_list<std::size_t> idx) {
    return data[offset(idx)];
  }
  double at(std::initializer_list<std::size_t> idx) const {
    return data[offset(idx)];
  }

  std::size_t offset(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != shape.size())
      throw shape_mismatch_error("index rank does not match tensor rank");
    std::size_t off = 0;
    std::size_t k = 0;
    for (std::size_t i : idx) {
      off = off * shape[k] + i;
      ++k;
    }
    return off;
  }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  // Checkpoint format: u64 rank, u64 per dim, then f64 payload, all
  // little-endian.
  void write(std::ostream& os) const {
    static_assert(std::endian::native == std::endian::little,
                  "serialization assumes a little-endian host");
    auto put_u64 = [&os](std::uint64_t v) {
      os.write(reinterpret_cast<const char*>(&v), 8);
    };
    put_u64(static_cast<std::uint64_t>(shape.size()));
    for (std::size_t d : shape) put_u64(static_cast<std::uint64_t>(d));
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(double)));
  }

  static tensor read(std::istream& is) {
    auto get_u64 = [&is]() {
      std::uint64_t v = 0;
      is.read(reinterpret_cast<char*>(&v), 8);
      if (!is) throw error("truncated tensor stream");
      return v;
    };
    std::uint64_t rank = get_u64();
    if (rank > 8) throw error("implausible tensor rank in stream");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get_u64());
    tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!is) throw error("truncated tensor stream");
    return t;
  }
};

/// Trainable leaf: a value plus a gradient accumulator of identical shape.
/// backward() adds into `grad`; callers reset between steps via zero_grad.
class parameter {
 public:
  explicit parameter(tensor v) : value(std::move(v)), grad(value.shape) {}

  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }

  tensor value;
  tensor grad;
};

// ---------------------------------------------------------------------------
// Recorded-tape reverse-mode differentiation. Nodes are appended in forward
// order, so a single reverse sweep visits every consumer before its inputs.

enum class op_code : std::uint8_t {
  leaf_input,
  leaf_param,
  add,        // same shape
  sub,        // same shape
  mul,        // elementwise, same shape
  add_bias,   // a (..., C) + b (C)
  scale,      // a * constant
  matmul,     // (m,k) x (k,n)
  transpose2, // (m,n) -> (n,m)
  tanh_op,
  sigmoid_op,
  relu_op,
  concat_last,    // variadic, along last axis
  stack0,         // variadic equal shapes -> new leading axis
  slice0,         // drop leading axis at fixed index
  reshape,        // same numel
  sum_all,        // -> scalar
  mean_all,       // -> scalar
  row_normalize,  // (n,n): rows divided by row sums, zero rows stay zero
  sym_normalize,  // (n,n): I + D^{-1/2} A D^{-1/2}, zero rows contribute zero
  causal_conv     // depthwise dilated conv along axis 0 of (T,R,C), g (K,C)
};

/// Stable logistic; saturates to exact 0.0 / 1.0 in the tails, which the
/// frozen-GRU reduction relies on.
inline double sigmoid(double x) {
  if (x >= 0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

class graph {
 public:
  struct node {
    std::int32_t id = -1;
  };

  graph() = default;

  /// Drops all recorded nodes but keeps buffer capacity for reuse.
  void reset() { entries_.clear(); }

  std::size_t size() const { return entries_.size(); }

  const tensor& value(node n) const { return entries_[idx(n)].value; }

  node input(tensor v) {
    entry e;
    e.op = op_code::leaf_input;
    e.value = std::move(v);
    return push(std::move(e));
  }

  node param(parameter& p) {
    entry e;
    e.op = op_code::leaf_param;
    e.value = p.value;
    e.bound = &p;
    return push(std::move(e));
  }

  node add(node a, node b) {
    require_same(a, b, "add");
    entry e;
    e.op = op_code::add;
    e.ins = {a.id, b.id};
    e.value = tensor(val(a).shape);
    for (std::size_t i = 0; i < e.value.size(); ++i)
      e.value[i] = val(a)[i] + val(b)[i];
    return push(std::move(e));
  }

  node sub(node a, node b) {
    require_same(a, b, "sub");
    entry e;
    e.op = op_code::sub;
    e.ins = {a.id, b.id};
    e.value = tensor(val(a).shape);
    for (std::size_t i = 0; i < e.value.size(); ++i)
      e.value[i] = val(a)[i] - val(b)[i];
    return push(std::move(e));
  }

  node mul(node a, node b) {
    require_same(a, b, "mul");
    entry e;
    e.op = op_code::mul;
    e.ins = {a.id, b.id};
    e.value = tensor(val(a).shape);
    for (std::size_t i = 0; i < e.value.size(); ++i)
      e.value[i] = val(a)[i] * val(b)[i];
    return push(std::move(e));
  }

  /// a has shape (..., C), b has shape (C); b is added to every C-row.
  node add_bias(node a, node b) {
    const tensor& ta = val(a);
    const tensor& tb = val(b);
    if (tb.rank() != 1 || ta.rank() < 1 || ta.shape.back() != tb.shape[0])
      throw shape_mismatch_error("add_bias: bias must match the last axis");
    entry e;
    e.op = op_code::add_bias;
    e.ins = {a.id, b.id};
    e.value = tensor(ta.shape);
    const std::size_t c = tb.shape[0];
    for (std::size_t i = 0; i < ta.size(); ++i)
      e.value[i] = ta[i] + tb[i % c];
    return push(std::move(e));
  }

  node scale(node a, double s) {
    entry e;
    e.op = op_code::scale;
    e.ins = {a.id};
    e.c0 = s;
    e.value = tensor(val(a).shape);
    for (std::size_t i = 0; i < e.value.size(); ++i)
      e.value[i] = val(a)[i] * s;
    return push(std::move(e));
  }

  node matmul(node a, node b) {
    const tensor& ta = val(a);
    const tensor& tb = val(b);
    if (ta.rank() != 2 || tb.rank() != 2 || ta.shape[1] != tb.shape[0])
      throw shape_mismatch_error("matmul: need (m,k) x (k,n)");
    const std::size_t m = ta.shape[0], k = ta.shape[1], n = tb.shape[1];
    entry e;
    e.op = op_code::matmul;
    e.ins = {a.id, b.id};
    e.value = tensor({m, n});
    // Ascending-k accumulation; reference oracles sum in the same order.
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p)
          acc += ta[i * k + p] * tb[p * n + j];
        e.value[i * n + j] = acc;
      }
    return push(std::move(e));
  }

  node transpose(node a) {
    const tensor& ta = val(a);
    if (ta.rank() != 2) throw shape_mismatch_error("transpose: rank-2 only");
    const std::size_t m = ta.shape[0], n = ta.shape[1];
    entry e;
    e.op = op_code::transpose2;
    e.ins = {a.id};
    e.value = tensor({n, m});
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) e.value[j * m + i] = ta[i * n + j];
    return push(std::move(e));
  }

  node tanh_(node a) {
    entry e;
    e.op = op_code::tanh_op;
    e.ins = {a.id};
    e.value = tensor(val(a).shape);
    for (std::size_t i = 0; i < e.value.size(); ++i)
      e.value[i] = std::tanh(val(a)[i]);
    return push(std::move(e));
  }

  node sigmoid_(node a) {
    entry e;
    e.op = op_code::sigmoid_op;
    e.ins = {a.id};
    e.value = tensor(val(a).shape);
    for (std::size_t i = 0; i < e.value.size(); ++i)
      e.value[i] = sigmoid(val(a)[i]);
    return push(std::move(e));
  }

  node relu_(node a) {
    entry e;
    e.op = op_code::relu_op;
    e.ins = {a.id};
    e.value = tensor(val(a).shape);
    for (std::size_t i = 0; i < e.value.size(); ++i)
      e.value[i] = val(a)[i] > 0.0 ? val(a)[i] : 0.0;
    return push(std::move(e));
  }

  /// Concatenation along the last axis; all other axes must agree.
  node concat(std::span<const node> parts) {
    if (parts.empty()) throw shape_mismatch_error("concat: no inputs");
    const tensor& t0 = val(parts[0]);
    std::size_t last_total = 0;
    for (node p : parts) {
      const tensor& t = val(p);
      if (t.rank() != t0.rank())
        throw shape_mismatch_error("concat: rank mismatch");
      for (std::size_t d = 0; d + 1 < t.rank(); ++d)
        if (t.shape[d] != t0.shape[d])
          throw shape_mismatch_error("concat: leading axes differ");
      last_total += t.shape.back();
    }
    std::vector<std::size_t> out_shape = t0.shape;
    out_shape.back() = last_total;
    const std::size_t rows = tensor::numel(out_shape) / last_total;
    entry e;
    e.op = op_code::concat_last;
    for (node p : parts) e.ins.push_back(p.id);
    e.value = tensor(out_shape);
    for (std::size_t r = 0; r < rows; ++r) {
      std::size_t off = 0;
      for (node p : parts) {
        const tensor& t = val(p);
        const std::size_t w = t.shape.back();
        for (std::size_t j = 0; j < w; ++j)
          e.value[r * last_total + off + j] = t[r * w + j];
        off += w;
      }
    }
    return push(std::move(e));
  }

  node concat(std::initializer_list<node> parts) {
    return concat(std::span<const node>(parts.begin(), parts.size()));
  }

  /// Stacks equally shaped tensors along a new leading axis.
  node stack(std::span<const node> parts) {
    if (parts.empty()) throw shape_mismatch_error("stack: no inputs");
    const tensor& t0 = val(parts[0]);
    for (node p : parts)
      if (!val(p).same_shape(t0))
        throw shape_mismatch_error("stack: shape mismatch");
    std::vector<std::size_t> out_shape;
    out_shape.push_back(parts.size());
    out_shape.insert(out_shape.end(), t0.shape.begin(), t0.shape.end());
    entry e;
    e.op = op_code::stack0;
    for (node p : parts) e.ins.push_back(p.id);
    e.value = tensor(out_shape);
    const std::size_t slab = t0.size();
    for (std::size_t s = 0; s < parts.size(); ++s)
      for (std::size_t i = 0; i < slab; ++i)
        e.value[s * slab + i] = val(parts[s])[i];
    return push(std::move(e));
  }

  node stack(std::initializer_list<node> parts) {
    return stack(std::span<const node>(parts.begin(), parts.size()));
  }

  /// Selects index `t` along the leading axis, dropping it.
  node slice0(node a, std::size_t t) {
    const tensor& ta = val(a);
    if (ta.rank() < 2 || t >= ta.shape[0])
      throw shape_mismatch_error("slice0: index out of range");
    std::vector<std::size_t> out_shape(ta.shape.begin() + 1, ta.shape.end());
    const std::size_t slab = tensor::numel(out_shape);
    entry e;
    e.op = op_code::slice0;
    e.ins = {a.id};
    e.i0 = static_cast<std::int64_t>(t);
    e.value = tensor(out_shape);
    for (std::size_t i = 0; i < slab; ++i) e.value[i] = ta[t * slab + i];
    return push(std::move(e));
  }

  node reshape(node a, std::vector<std::size_t> new_shape) {
    const tensor& ta = val(a);
    if (tensor::numel(new_shape) != ta.size())
      throw shape_mismatch_error("reshape: element count changed");
    entry e;
    e.op = op_code::reshape;
    e.ins = {a.id};
    e.value = tensor(std::move(new_shape), ta.data);
    return push(std::move(e));
  }

  node sum(node a) {
    entry e;
    e.op = op_code::sum_all;
    e.ins = {a.id};
    double acc = 0.0;
    for (double v : val(a).data) acc += v;
    e.value = tensor::scalar(acc);
    return push(std::move(e));
  }

  node mean(node a) {
    entry e;
    e.op = op_code::mean_all;
    e.ins = {a.id};
    double acc = 0.0;
    for (double v : val(a).data) acc += v;
    e.value = tensor::scalar(acc / static_cast<double>(val(a).size()));
    return push(std::move(e));
  }

  /// Row-stochastic normalization of a nonnegative square matrix; rows with
  /// sum 0 map to zero rows (absorbing convention).
  node row_normalize(node a) {
    const tensor& ta = val(a);
    if (ta.rank() != 2 || ta.shape[0] != ta.shape[1])
      throw shape_mismatch_error("row_normalize: square matrix required");
    const std::size_t n = ta.shape[0];
    entry e;
    e.op = op_code::row_normalize;
    e.ins = {a.id};
    e.value = tensor({n, n});
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += ta[i * n + j];
      if (s > 0.0)
        for (std::size_t j = 0; j < n; ++j) e.value[i * n + j] = ta[i * n + j] / s;
    }
    return push(std::move(e));
  }

  /// I + D^{-1/2} A D^{-1/2} with D = diag(row sums); zero-sum rows use
  /// (D^{-1/2})_ii = 0, so an isolated node keeps only its identity entry.
  node sym_normalize(node a) {
    const tensor& ta = val(a);
    if (ta.rank() != 2 || ta.shape[0] != ta.shape[1])
      throw shape_mismatch_error("sym_normalize: square matrix required");
    const std::size_t n = ta.shape[0];
    entry e;
    e.op = op_code::sym_normalize;
    e.ins = {a.id};
    e.value = tensor({n, n});
    std::vector<double> r(n, 0.0);  // s_i^{-1/2}, 0 for empty rows
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += ta[i * n + j];
      if (s > 0.0) r[i] = 1.0 / std::sqrt(s);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        e.value[i * n + j] = ta[i * n + j] * r[i] * r[j];
      e.value[i * n + i] += 1.0;
    }
    return push(std::move(e));
  }

  /// Depthwise dilated convolution along axis 0. x is (T,R,C), filter g is
  /// (K,C), one kernel per channel shared across R. causal_pad keeps length T
  /// with left zero-padding; otherwise the output length is T - d*(K-1).
  node causal_conv(node x, node g, std::size_t dilation, bool causal_pad) {
    const tensor& tx = val(x);
    const tensor& tg = val(g);
    if (tx.rank() != 3 || tg.rank() != 2 || tg.shape[1] != tx.shape[2])
      throw shape_mismatch_error("causal_conv: need x (T,R,C), g (K,C)");
    if (dilation < 1) throw shape_mismatch_error("causal_conv: dilation >= 1");
    const std::size_t t_in = tx.shape[0], rdim = tx.shape[1], c = tx.shape[2];
    const std::size_t k = tg.shape[0];
    const std::size_t span = dilation * (k - 1);
    if (!causal_pad && span >= t_in)
      throw shape_mismatch_error("causal_conv: kernel span exceeds length");
    const std::size_t t_out = causal_pad ? t_in : t_in - span;
    entry e;
    e.op = op_code::causal_conv;
    e.ins = {x.id, g.id};
    e.i0 = static_cast<std::int64_t>(dilation);
    e.i1 = causal_pad ? 1 : 0;
    e.value = tensor({t_out, rdim, c});
    const std::size_t rc = rdim * c;
    for (std::size_t t = 0; t < t_out; ++t) {
      // Output index t reads input indices t_ref - d*s, never the future.
      const std::size_t t_ref = causal_pad ? t : t + span;
      for (std::size_t s = 0; s < k; ++s) {
        const std::size_t back = dilation * s;
        if (back > t_ref) break;  // left zero-padding region
        const std::size_t ti = t_ref - back;
        for (std::size_t r0 = 0; r0 < rdim; ++r0)
          for (std::size_t ch = 0; ch < c; ++ch)
            e.value[t * rc + r0 * c + ch] +=
                tg[s * c + ch] * tx[ti * rc + r0 * c + ch];
      }
    }
    return push(std::move(e));
  }

  /// Accumulates d(loss)/d(parameter) into every bound parameter's grad.
  /// The loss must be scalar; repeated calls keep accumulating.
  void backward(node loss) {
    entry& last = entries_[idx(loss)];
    if (last.value.size() != 1)
      throw non_scalar_loss_error("backward: loss must be scalar");
    for (auto& e : entries_) e.grad.data.clear();
    ensure_grad(idx(loss));
    entries_[idx(loss)].grad[0] = 1.0;

    for (std::size_t pos = entries_.size(); pos-- > 0;) {
      entry& e = entries_[pos];
      if (e.grad.data.empty()) continue;  // not on any path to the loss
      propagate(e);
    }
  }

 private:
  struct entry {
    op_code op;
    tensor value;
    tensor grad;  // allocated lazily during backward
    std::vector<std::int32_t> ins;
    parameter* bound = nullptr;
    double c0 = 0.0;
    std::int64_t i0 = 0, i1 = 0;
  };

  std::size_t idx(node n) const { return static_cast<std::size_t>(n.id); }
  const tensor& val(node n) const { return entries_[idx(n)].value; }

  node push(entry e) {
    entries_.push_back(std::move(e));
    return node{static_cast<std::int32_t>(entries_.size() - 1)};
  }

  void require_same(node a, node b, const char* what) {
    if (!val(a).same_shape(val(b)))
      throw shape_mismatch_error(std::string(what) + ": shape mismatch");
  }

  tensor& ensure_grad(std::size_t i) {
    entry& e = entries_[i];
    if (e.grad.data.empty()) e.grad = tensor(e.value.shape);
    return e.grad;
  }

  void propagate(entry& e) {
    const tensor& g = e.grad;
    switch (e.op) {
      case op_code::leaf_input:
        break;
      case op_code::leaf_param:
        for (std::size_t i = 0; i < g.size(); ++i) e.bound->grad[i] += g[i];
        break;
      case op_code::add: {
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        tensor& gb = ensure_grad(static_cast<std::size_t>(e.ins[1]));
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      }
      case op_code::sub: {
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        tensor& gb = ensure_grad(static_cast<std::size_t>(e.ins[1]));
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      }
      case op_code::mul: {
        const tensor& a = entries_[static_cast<std::size_t>(e.ins[0])].value;
        const tensor& b = entries_[static_cast<std::size_t>(e.ins[1])].value;
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        tensor& gb = ensure_grad(static_cast<std::size_t>(e.ins[1]));
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * b[i];
          gb[i] += g[i] * a[i];
        }
        break;
      }
      case op_code::add_bias: {
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        tensor& gb = ensure_grad(static_cast<std::size_t>(e.ins[1]));
        const std::size_t c = gb.size();
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i];
          gb[i % c] += g[i];
        }
        break;
      }
      case op_code::scale: {
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * e.c0;
        break;
      }
      case op_code::matmul: {
        const tensor& a = entries_[static_cast<std::size_t>(e.ins[0])].value;
        const tensor& b = entries_[static_cast<std::size_t>(e.ins[1])].value;
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        tensor& gb = ensure_grad(static_cast<std::size_t>(e.ins[1]));
        const std::size_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
        // dA = G B^T, dB = A^T G
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j)
              acc += g[i * n + j] * b[p * n + j];
            ga[i * k + p] += acc;
          }
        for (std::size_t p = 0; p < k; ++p)
          for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i)
              acc += a[i * k + p] * g[i * n + j];
            gb[p * n + j] += acc;
          }
        break;
      }
      case op_code::transpose2: {
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        const std::size_t n = e.value.shape[0], m = e.value.shape[1];
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t i = 0; i < m; ++i)
            ga[i * n + j] += g[j * m + i];
        break;
      }
      case op_code::tanh_op: {
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        for (std::size_t i = 0; i < g.size(); ++i)
          ga[i] += g[i] * (1.0 - e.value[i] * e.value[i]);
        break;
      }
      case op_code::sigmoid_op: {
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        for (std::size_t i = 0; i < g.size(); ++i)
          ga[i] += g[i] * e.value[i] * (1.0 - e.value[i]);
        break;
      }
      case op_code::relu_op: {
        const tensor& a = entries_[static_cast<std::size_t>(e.ins[0])].value;
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        for (std::size_t i = 0; i < g.size(); ++i)
          if (a[i] > 0.0) ga[i] += g[i];
        break;
      }
      case op_code::concat_last: {
        const std::size_t last_total = e.value.shape.back();
        const std::size_t rows = e.value.size() / last_total;
        std::size_t off = 0;
        for (std::int32_t in : e.ins) {
          tensor& gi = ensure_grad(static_cast<std::size_t>(in));
          const std::size_t w = gi.shape.back();
          for (std::size_t r0 = 0; r0 < rows; ++r0)
            for (std::size_t j = 0; j < w; ++j)
              gi[r0 * w + j] += g[r0 * last_total + off + j];
          off += w;
        }
        break;
      }
      case op_code::stack0: {
        const std::size_t slab = e.value.size() / e.ins.size();
        for (std::size_t s = 0; s < e.ins.size(); ++s) {
          tensor& gi = ensure_grad(static_cast<std::size_t>(e.ins[s]));
          for (std::size_t i = 0; i < slab; ++i) gi[i] += g[s * slab + i];
        }
        break;
      }
      case op_code::slice0: {
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        const std::size_t slab = e.value.size();
        const std::size_t t = static_cast<std::size_t>(e.i0);
        for (std::size_t i = 0; i < slab; ++i) ga[t * slab + i] += g[i];
        break;
      }
      case op_code::reshape: {
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        break;
      }
      case op_code::sum_all: {
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
        break;
      }
      case op_code::mean_all: {
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        const double s = g[0] / static_cast<double>(ga.size());
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += s;
        break;
      }
      case op_code::row_normalize: {
        const tensor& a = entries_[static_cast<std::size_t>(e.ins[0])].value;
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        const std::size_t n = a.shape[0];
        // y_ij = a_ij/s_i: dL/da_ik = (g_ik - sum_j g_ij y_ij) / s_i
        for (std::size_t i = 0; i < n; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += a[i * n + j];
          if (s <= 0.0) continue;  // zero rows: derivative taken as zero
          double dot = 0.0;
          for (std::size_t j = 0; j < n; ++j)
            dot += g[i * n + j] * e.value[i * n + j];
          for (std::size_t j = 0; j < n; ++j)
            ga[i * n + j] += (g[i * n + j] - dot) / s;
        }
        break;
      }
      case op_code::sym_normalize: {
        const tensor& a = entries_[static_cast<std::size_t>(e.ins[0])].value;
        tensor& ga = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        const std::size_t n = a.shape[0];
        std::vector<double> s(n, 0.0), r(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) s[i] += a[i * n + j];
          if (s[i] > 0.0) r[i] = 1.0 / std::sqrt(s[i]);
        }
        // y_ij = d_ij + a_ij r_i r_j with r_i = s_i^{-1/2}:
        // dL/da_kl = g_kl r_k r_l
        //            - (1/2) s_k^{-3/2} (sum_j g_kj a_kj r_j
        //                                + sum_i g_ik a_ik r_i)
        std::vector<double> row_dot(n, 0.0), col_dot(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            row_dot[i] += g[i * n + j] * a[i * n + j] * r[j];
            col_dot[j] += g[i * n + j] * a[i * n + j] * r[i];
          }
        for (std::size_t k2 = 0; k2 < n; ++k2) {
          if (r[k2] == 0.0) continue;  // zero rows: derivative taken as zero
          const double s32 = 0.5 * r[k2] * r[k2] * r[k2];  // (1/2) s^{-3/2}
          const double corr = s32 * (row_dot[k2] + col_dot[k2]);
          for (std::size_t l = 0; l < n; ++l)
            ga[k2 * n + l] += g[k2 * n + l] * r[k2] * r[l] - corr;
        }
        break;
      }
      case op_code::causal_conv: {
        const tensor& x = entries_[static_cast<std::size_t>(e.ins[0])].value;
        const tensor& f = entries_[static_cast<std::size_t>(e.ins[1])].value;
        tensor& gx = ensure_grad(static_cast<std::size_t>(e.ins[0]));
        tensor& gf = ensure_grad(static_cast<std::size_t>(e.ins[1]));
        const std::size_t d = static_cast<std::size_t>(e.i0);
        const bool pad = e.i1 != 0;
        const std::size_t k = f.shape[0];
        const std::size_t t_out = e.value.shape[0];
        const std::size_t rdim = e.value.shape[1], c = e.value.shape[2];
        const std::size_t rc = rdim * c;
        const std::size_t span = d * (k - 1);
        for (std::size_t t = 0; t < t_out; ++t) {
          const std::size_t t_ref = pad ? t : t + span;
          for (std::size_t s2 = 0; s2 < k; ++s2) {
            const std::size_t back = d * s2;
            if (back > t_ref) break;
            const std::size_t ti = t_ref - back;
            for (std::size_t r0 = 0; r0 < rdim; ++r0)
              for (std::size_t ch = 0; ch < c; ++ch) {
                const double go = g[t * rc + r0 * c + ch];
                gx[ti * rc + r0 * c + ch] += go * f[s2 * c + ch];
                gf[s2 * c + ch] += go * x[ti * rc + r0 * c + ch];
              }
          }
        }
        break;
      }
    }
  }

  std::vector<entry> entries_;
};

// ---------------------------------------------------------------------------
// Finite-difference verification.
//
// `run(with_grad)` must rebuild the computation from current parameter values
// and return the scalar loss; when with_grad is set it must also run
// backward() so analytic gradients land in the parameters.

struct gradcheck_report {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::size_t worst_param = 0;
  std::size_t worst_coord = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

inline gradcheck_report finite_difference_check(
    std::span<parameter* const> params,
    const std::function<double(bool with_grad)>& run, double h) {
  if (h <= 0) throw error("finite_difference_check: h must be positive");
  for (parameter* p : params) p->zero_grad();
  run(true);
  std::vector<tensor> analytic;
  analytic.reserve(params.size());
  for (parameter* p : params) analytic.push_back(p->grad);

  gradcheck_report rep;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    parameter& p = *params[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + h;
      const double lp = run(false);
      p.value[i] = saved - h;
      const double lm = run(false);
      p.value[i] = saved;
      const double num = (lp - lm) / (2.0 * h);
      const double ana = analytic[pi][i];
      const double denom =
          std::max({std::fabs(ana), std::fabs(num), 1e-8});
      const double rel = std::fabs(ana - num) / denom;
      ++rep.coords_checked;
      if (rel > rep.max_rel_error) {
        rep.max_rel_error = rel;
        rep.worst_param = pi;
        rep.worst_coord = i;
        rep.worst_analytic = ana;
        rep.worst_numeric = num;
      }
    }
  }
  return rep;
}

}  // namespace dan
