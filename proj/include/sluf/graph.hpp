// Copyright 2026 SLUF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sluf/common.hpp"
#include "sluf/tensor.hpp"

namespace sluf {

// Named trainable parameters with accumulated gradient slots. Iteration
// order is the sorted name order, which keeps every downstream artifact
// (checkpoints, optimizer sweeps) deterministic.
class ParamStore {
 public:
  struct Param {
    Tensor value;
    Tensor grad;  // same shape as value; accumulated across backward calls
  };

  Tensor& create(const std::string& name, Tensor init) {
    check(!params_.count(name), "param '", name, "' already registered");
    Param p;
    p.grad = Tensor(init.shape);
    p.value = std::move(init);
    return params_.emplace(name, std::move(p)).first->second.value;
  }

  bool has(const std::string& name) const { return params_.count(name) > 0; }

  Param& at(const std::string& name) {
    auto it = params_.find(name);
    check(it != params_.end(), "unknown param '", name, "'");
    return it->second;
  }
  const Param& at(const std::string& name) const {
    auto it = params_.find(name);
    check(it != params_.end(), "unknown param '", name, "'");
    return it->second;
  }

  void zero_grads() {
    for (auto& [name, p] : params_) std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
  }

  std::map<std::string, Param>& all() { return params_; }
  const std::map<std::string, Param>& all() const { return params_; }
  std::size_t size() const { return params_.size(); }

 private:
  std::map<std::string, Param> params_;
};

enum class Op {
  kInput,
  kParam,
  kMatmul,
  kAdd,
  kMul,
  kConcat,
  kSlice,
  kSigmoid,
  kTanh,
  kRelu,
  kSoftmax,
  kLogSoftmax,
  kLog,
  kMean,
  kEmbed,
  kReshape,
};

inline const char* op_name(Op op) {
  switch (op) {
    case Op::kInput: return "input";
    case Op::kParam: return "param";
    case Op::kMatmul: return "matmul";
    case Op::kAdd: return "add";
    case Op::kMul: return "multiply";
    case Op::kConcat: return "concat";
    case Op::kSlice: return "slice";
    case Op::kSigmoid: return "sigmoid";
    case Op::kTanh: return "tanh";
    case Op::kRelu: return "relu";
    case Op::kSoftmax: return "softmax";
    case Op::kLogSoftmax: return "log_softmax";
    case Op::kLog: return "log";
    case Op::kMean: return "mean";
    case Op::kEmbed: return "embedding_lookup";
    case Op::kReshape: return "reshape";
  }
  return "?";
}

// Handle into a Tape; cheap to copy.
struct Value {
  int idx = -1;
};

// Append-only reverse-mode tape. Nodes are evaluated eagerly on insertion;
// backward walks them once in reverse insertion order. A tape is rebuilt
// per example or batch and is not shareable while under construction.
class Tape {
 public:
  Tape() = default;
  explicit Tape(ParamStore* store) : store_(store) {}

  const Tensor& value(Value v) const { return nodes_[check_idx(v)].value; }
  const Tensor& grad(Value v) const { return nodes_[check_idx(v)].grad; }
  std::size_t size() const { return nodes_.size(); }

  Value input(Tensor t) {
    Node n;
    n.op = Op::kInput;
    n.value = std::move(t);
    return push(std::move(n));
  }

  // Binds a registered parameter as a leaf; repeated binds of the same
  // name return the same node so gradients accumulate naturally.
  Value param(const std::string& name) {
    check(store_ != nullptr, "tape has no parameter store");
    auto it = param_nodes_.find(name);
    if (it != param_nodes_.end()) return Value{it->second};
    Node n;
    n.op = Op::kParam;
    n.value = store_->at(name).value;
    n.name = name;
    Value v = push(std::move(n));
    param_nodes_.emplace(name, v.idx);
    return v;
  }

  Value matmul(Value a, Value b) {
    const Tensor& ta = nodes_[check_idx(a)].value;
    const Tensor& tb = nodes_[check_idx(b)].value;
    check(ta.rank() == 2 && tb.rank() == 2 && ta.shape[1] == tb.shape[0],
          "matmul: incompatible shapes ", shape_str(ta.shape), " x ", shape_str(tb.shape));
    Node n;
    n.op = Op::kMatmul;
    n.inputs = {a.idx, b.idx};
    n.value = Tensor({ta.shape[0], tb.shape[1]});
    matmul_acc(ta, tb, n.value, false, false);
    return push(std::move(n));
  }

  Value add(Value a, Value b) { return binary(Op::kAdd, a, b); }
  Value mul(Value a, Value b) { return binary(Op::kMul, a, b); }

  Value add_scalar(Value a, double c) { return add(a, input(Tensor::scalar(c))); }
  Value mul_scalar(Value a, double c) { return mul(a, input(Tensor::scalar(c))); }

  Value concat(int axis, const std::vector<Value>& parts) {
    check(!parts.empty(), "concat: no inputs");
    const Tensor& first = nodes_[check_idx(parts[0])].value;
    check(axis >= 0 && axis < first.rank(), "concat: bad axis ", axis, " for rank ", first.rank());
    std::vector<std::int64_t> shape = first.shape;
    std::int64_t total = 0;
    for (Value p : parts) {
      const Tensor& t = nodes_[check_idx(p)].value;
      check(t.rank() == first.rank(), "concat: rank mismatch");
      for (std::int64_t d = 0; d < t.rank(); ++d)
        check(d == axis || t.shape[d] == first.shape[d], "concat: shape mismatch ",
              shape_str(t.shape), " vs ", shape_str(first.shape));
      total += t.shape[axis];
    }
    shape[axis] = total;
    Node n;
    n.op = Op::kConcat;
    n.axis = axis;
    n.value = Tensor(shape);
    for (Value p : parts) n.inputs.push_back(p.idx);
    // Row-major copy: axis 0 concatenates blocks, the last axis interleaves rows.
    if (axis == 0 || first.rank() == 1) {
      std::int64_t off = 0;
      for (Value p : parts) {
        const Tensor& t = nodes_[p.idx].value;
        std::copy(t.data.begin(), t.data.end(), n.value.data.begin() + off);
        off += t.numel();
      }
    } else {
      std::int64_t rows = shape[0];
      for (std::int64_t r = 0; r < rows; ++r) {
        std::int64_t off = r * shape[1];
        for (Value p : parts) {
          const Tensor& t = nodes_[p.idx].value;
          std::copy(t.data.begin() + r * t.shape[1], t.data.begin() + (r + 1) * t.shape[1],
                    n.value.data.begin() + off);
          off += t.shape[1];
        }
      }
    }
    return push(std::move(n));
  }

  Value slice(Value x, int axis, std::int64_t start, std::int64_t len) {
    const Tensor& t = nodes_[check_idx(x)].value;
    check(axis >= 0 && axis < t.rank(), "slice: bad axis ", axis, " for rank ", t.rank());
    check(start >= 0 && len > 0 && start + len <= t.shape[axis], "slice: range [", start, ",",
          start + len, ") out of extent ", t.shape[axis]);
    std::vector<std::int64_t> shape = t.shape;
    shape[axis] = len;
    Node n;
    n.op = Op::kSlice;
    n.axis = axis;
    n.start = start;
    n.inputs = {x.idx};
    n.value = Tensor(shape);
    if (axis == 0 || t.rank() == 1) {
      std::int64_t w = t.numel() / t.shape[0];
      if (t.rank() == 1) w = 1;
      std::copy(t.data.begin() + start * w, t.data.begin() + (start + len) * w, n.value.data.begin());
    } else {
      for (std::int64_t r = 0; r < t.shape[0]; ++r)
        std::copy(t.data.begin() + r * t.shape[1] + start,
                  t.data.begin() + r * t.shape[1] + start + len, n.value.data.begin() + r * len);
    }
    return push(std::move(n));
  }

  Value sigmoid(Value x) {
    return unary(Op::kSigmoid, x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
  Value tanh(Value x) {
    return unary(Op::kTanh, x, [](double v) { return std::tanh(v); });
  }
  Value relu(Value x) {
    return unary(Op::kRelu, x, [](double v) { return v > 0.0 ? v : 0.0; });
  }
  Value log(Value x) {
    return unary(Op::kLog, x, [](double v) { return std::log(v); });
  }

  // Row-wise softmax over the last axis (rank-1 tensors are one row).
  Value softmax(Value x) { return rowwise(Op::kSoftmax, x); }
  Value log_softmax(Value x) { return rowwise(Op::kLogSoftmax, x); }

  // Mean over one axis, keeping the reduced axis with extent 1.
  Value mean(Value x, int axis) {
    const Tensor& t = nodes_[check_idx(x)].value;
    check(axis >= 0 && axis < t.rank(), "mean: bad axis ", axis, " for rank ", t.rank());
    std::vector<std::int64_t> shape = t.shape;
    shape[axis] = 1;
    Node n;
    n.op = Op::kMean;
    n.axis = axis;
    n.inputs = {x.idx};
    n.value = Tensor(shape);
    if (t.rank() == 1 || axis == 0) {
      std::int64_t rows = t.rank() == 1 ? t.shape[0] : t.shape[0];
      std::int64_t cols = t.rank() == 1 ? 1 : t.shape[1];
      for (std::int64_t c = 0; c < cols; ++c) {
        double s = 0;
        for (std::int64_t r = 0; r < rows; ++r) s += t.data[r * cols + c];
        n.value.data[c] = s / static_cast<double>(rows);
      }
    } else {
      for (std::int64_t r = 0; r < t.shape[0]; ++r) {
        double s = 0;
        for (std::int64_t c = 0; c < t.shape[1]; ++c) s += t.data[r * t.shape[1] + c];
        n.value.data[r] = s / static_cast<double>(t.shape[1]);
      }
    }
    return push(std::move(n));
  }

  Value embedding(Value table, const std::vector<int>& ids) {
    const Tensor& t = nodes_[check_idx(table)].value;
    check(t.rank() == 2, "embedding_lookup: table must be rank 2, got ", shape_str(t.shape));
    check(!ids.empty(), "embedding_lookup: empty id list");
    std::int64_t e = t.shape[1];
    Node n;
    n.op = Op::kEmbed;
    n.inputs = {table.idx};
    n.ids = ids;
    n.value = Tensor({static_cast<std::int64_t>(ids.size()), e});
    for (std::size_t i = 0; i < ids.size(); ++i) {
      check(ids[i] >= 0 && ids[i] < t.shape[0], "embedding_lookup: id ", ids[i],
            " out of table rows ", t.shape[0]);
      std::copy(t.data.begin() + ids[i] * e, t.data.begin() + (ids[i] + 1) * e,
                n.value.data.begin() + static_cast<std::int64_t>(i) * e);
    }
    return push(std::move(n));
  }

  Value reshape(Value x, std::vector<std::int64_t> shape) {
    const Tensor& t = nodes_[check_idx(x)].value;
    check(Tensor::numel_of(shape) == t.numel(), "reshape: ", shape_str(t.shape), " to ",
          shape_str(shape), " changes element count");
    Node n;
    n.op = Op::kReshape;
    n.inputs = {x.idx};
    n.value = Tensor(std::move(shape), t.data);
    return push(std::move(n));
  }

  // Reverse sweep from a scalar loss. Node gradients are reset per call;
  // parameter gradients in the store accumulate across calls.
  void backward(Value loss) {
    const Tensor& lt = nodes_[check_idx(loss)].value;
    check(lt.numel() == 1, "backward: loss must be scalar, got ", shape_str(lt.shape));
    for (Node& n : nodes_) {
      n.grad = Tensor(n.value.shape);
    }
    nodes_[loss.idx].grad.data[0] = 1.0;
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) backward_node(nodes_[i]);
    if (store_ != nullptr) {
      for (auto& [name, idx] : param_nodes_) {
        Tensor& g = store_->at(name).grad;
        const Tensor& ng = nodes_[idx].grad;
        for (std::size_t k = 0; k < g.data.size(); ++k) g.data[k] += ng.data[k];
      }
    }
  }

 private:
  struct Node {
    Op op = Op::kInput;
    Tensor value;
    Tensor grad;
    std::vector<int> inputs;
    int axis = -1;
    std::int64_t start = 0;
    std::vector<int> ids;
    std::string name;  // kParam only
  };

  int check_idx(Value v) const {
    check(v.idx >= 0 && v.idx < static_cast<int>(nodes_.size()), "dangling value handle");
    return v.idx;
  }

  Value push(Node n) {
    nodes_.push_back(std::move(n));
    return Value{static_cast<int>(nodes_.size()) - 1};
  }

  template <typename F>
  Value unary(Op op, Value x, F f) {
    const Tensor& t = nodes_[check_idx(x)].value;
    Node n;
    n.op = op;
    n.inputs = {x.idx};
    n.value = Tensor(t.shape);
    for (std::size_t i = 0; i < t.data.size(); ++i) n.value.data[i] = f(t.data[i]);
    return push(std::move(n));
  }

  // add/mul support equal shapes, a scalar right operand, or a right
  // operand matching the last axis (broadcast over leading rows).
  Value binary(Op op, Value a, Value b) {
    const Tensor& ta = nodes_[check_idx(a)].value;
    const Tensor& tb = nodes_[check_idx(b)].value;
    int mode;  // 0 = elementwise, 1 = scalar b, 2 = last-axis b
    if (ta.same_shape(tb))
      mode = 0;
    else if (tb.numel() == 1)
      mode = 1;
    else if (tb.numel() == ta.shape.back() && (tb.rank() == 1 || (tb.rank() == 2 && tb.shape[0] == 1)))
      mode = 2;
    else
      fail(op_name(op), ": shapes ", shape_str(ta.shape), " and ", shape_str(tb.shape),
           " neither match nor broadcast (scalar/last-axis only)");
    Node n;
    n.op = op;
    n.axis = mode;
    n.inputs = {a.idx, b.idx};
    n.value = Tensor(ta.shape);
    std::int64_t w = ta.shape.back();
    for (std::int64_t i = 0; i < ta.numel(); ++i) {
      double rhs = mode == 0 ? tb.data[i] : mode == 1 ? tb.data[0] : tb.data[i % w];
      n.value.data[i] = op == Op::kAdd ? ta.data[i] + rhs : ta.data[i] * rhs;
    }
    return push(std::move(n));
  }

  Value rowwise(Op op, Value x) {
    const Tensor& t = nodes_[check_idx(x)].value;
    check(t.rank() >= 1, "softmax: needs rank >= 1");
    Node n;
    n.op = op;
    n.inputs = {x.idx};
    n.value = Tensor(t.shape);
    std::int64_t w = t.shape.back();
    std::int64_t rows = t.numel() / w;
    for (std::int64_t r = 0; r < rows; ++r) {
      const double* in = t.data.data() + r * w;
      double* out = n.value.data.data() + r * w;
      double mx = in[0];
      for (std::int64_t c = 1; c < w; ++c) mx = std::max(mx, in[c]);
      double z = 0;
      for (std::int64_t c = 0; c < w; ++c) z += std::exp(in[c] - mx);
      if (op == Op::kSoftmax) {
        for (std::int64_t c = 0; c < w; ++c) out[c] = std::exp(in[c] - mx) / z;
      } else {
        double lz = std::log(z);
        for (std::int64_t c = 0; c < w; ++c) out[c] = in[c] - mx - lz;
      }
    }
    return push(std::move(n));
  }

  static void matmul_acc(const Tensor& a, const Tensor& b, Tensor& out, bool ta, bool tb) {
    // out += op(a) * op(b); shapes already validated by callers.
    std::int64_t m = ta ? a.shape[1] : a.shape[0];
    std::int64_t kk = ta ? a.shape[0] : a.shape[1];
    std::int64_t nn = tb ? b.shape[0] : b.shape[1];
    const double* pa = a.data.data();
    const double* pb = b.data.data();
    double* po = out.data.data();
    if (!ta && !tb) {
      for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t k = 0; k < kk; ++k) {
          double av = pa[i * kk + k];
          if (av == 0.0) continue;
          const double* bq = pb + k * nn;
          double* oq = po + i * nn;
          for (std::int64_t j = 0; j < nn; ++j) oq[j] += av * bq[j];
        }
    } else if (!ta && tb) {
      // out[i,j] += sum_k a[i,k] * b[j,k]
      for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < nn; ++j) {
          const double* ap = pa + i * kk;
          const double* bq = pb + j * kk;
          double s = 0;
          for (std::int64_t k = 0; k < kk; ++k) s += ap[k] * bq[k];
          po[i * nn + j] += s;
        }
    } else if (ta && !tb) {
      // out[i,j] += sum_k a[k,i] * b[k,j]
      for (std::int64_t k = 0; k < kk; ++k) {
        const double* ap = pa + k * m;
        const double* bq = pb + k * nn;
        for (std::int64_t i = 0; i < m; ++i) {
          double av = ap[i];
          if (av == 0.0) continue;
          double* oq = po + i * nn;
          for (std::int64_t j = 0; j < nn; ++j) oq[j] += av * bq[j];
        }
      }
    } else {
      for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < nn; ++j) {
          double s = 0;
          for (std::int64_t k = 0; k < kk; ++k) s += pa[k * m + i] * pb[j * kk + k];
          po[i * nn + j] += s;
        }
    }
  }

  void backward_node(Node& n) {
    switch (n.op) {
      case Op::kInput:
      case Op::kParam:
        return;
      case Op::kMatmul: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        matmul_acc(n.grad, b.value, a.grad, false, true);
        matmul_acc(a.value, n.grad, b.grad, true, false);
        return;
      }
      case Op::kAdd:
      case Op::kMul: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        int mode = n.axis;
        std::int64_t w = a.value.shape.back();
        for (std::int64_t i = 0; i < n.value.numel(); ++i) {
          double g = n.grad.data[i];
          std::int64_t bi = mode == 0 ? i : mode == 1 ? 0 : i % w;
          if (n.op == Op::kAdd) {
            a.grad.data[i] += g;
            b.grad.data[bi] += g;
          } else {
            a.grad.data[i] += g * b.value.data[bi];
            b.grad.data[bi] += g * a.value.data[i];
          }
        }
        return;
      }
      case Op::kConcat: {
        int axis = n.axis;
        const Tensor& out = n.value;
        if (axis == 0 || out.rank() == 1) {
          std::int64_t off = 0;
          for (int idx : n.inputs) {
            Node& p = nodes_[idx];
            for (std::int64_t k = 0; k < p.value.numel(); ++k) p.grad.data[k] += n.grad.data[off + k];
            off += p.value.numel();
          }
        } else {
          std::int64_t rows = out.shape[0];
          for (std::int64_t r = 0; r < rows; ++r) {
            std::int64_t off = r * out.shape[1];
            for (int idx : n.inputs) {
              Node& p = nodes_[idx];
              std::int64_t pw = p.value.shape[1];
              for (std::int64_t c = 0; c < pw; ++c) p.grad.data[r * pw + c] += n.grad.data[off + c];
              off += pw;
            }
          }
        }
        return;
      }
      case Op::kSlice: {
        Node& x = nodes_[n.inputs[0]];
        const Tensor& t = x.value;
        if (n.axis == 0 || t.rank() == 1) {
          std::int64_t w = t.rank() == 1 ? 1 : t.numel() / t.shape[0];
          std::int64_t off = n.start * w;
          for (std::int64_t k = 0; k < n.value.numel(); ++k) x.grad.data[off + k] += n.grad.data[k];
        } else {
          std::int64_t len = n.value.shape[1];
          for (std::int64_t r = 0; r < t.shape[0]; ++r)
            for (std::int64_t c = 0; c < len; ++c)
              x.grad.data[r * t.shape[1] + n.start + c] += n.grad.data[r * len + c];
        }
        return;
      }
      case Op::kSigmoid: {
        Node& x = nodes_[n.inputs[0]];
        for (std::size_t i = 0; i < n.value.data.size(); ++i) {
          double s = n.value.data[i];
          x.grad.data[i] += n.grad.data[i] * s * (1.0 - s);
        }
        return;
      }
      case Op::kTanh: {
        Node& x = nodes_[n.inputs[0]];
        for (std::size_t i = 0; i < n.value.data.size(); ++i) {
          double t = n.value.data[i];
          x.grad.data[i] += n.grad.data[i] * (1.0 - t * t);
        }
        return;
      }
      case Op::kRelu: {
        Node& x = nodes_[n.inputs[0]];
        for (std::size_t i = 0; i < n.value.data.size(); ++i)
          if (x.value.data[i] > 0.0) x.grad.data[i] += n.grad.data[i];
        return;
      }
      case Op::kLog: {
        Node& x = nodes_[n.inputs[0]];
        for (std::size_t i = 0; i < n.value.data.size(); ++i)
          x.grad.data[i] += n.grad.data[i] / x.value.data[i];
        return;
      }
      case Op::kSoftmax: {
        Node& x = nodes_[n.inputs[0]];
        std::int64_t w = n.value.shape.back();
        std::int64_t rows = n.value.numel() / w;
        for (std::int64_t r = 0; r < rows; ++r) {
          const double* s = n.value.data.data() + r * w;
          const double* g = n.grad.data.data() + r * w;
          double dot = 0;
          for (std::int64_t c = 0; c < w; ++c) dot += s[c] * g[c];
          for (std::int64_t c = 0; c < w; ++c) x.grad.data[r * w + c] += s[c] * (g[c] - dot);
        }
        return;
      }
      case Op::kLogSoftmax: {
        Node& x = nodes_[n.inputs[0]];
        std::int64_t w = n.value.shape.back();
        std::int64_t rows = n.value.numel() / w;
        for (std::int64_t r = 0; r < rows; ++r) {
          const double* ls = n.value.data.data() + r * w;
          const double* g = n.grad.data.data() + r * w;
          double gsum = 0;
          for (std::int64_t c = 0; c < w; ++c) gsum += g[c];
          for (std::int64_t c = 0; c < w; ++c)
            x.grad.data[r * w + c] += g[c] - std::exp(ls[c]) * gsum;
        }
        return;
      }
      case Op::kMean: {
        Node& x = nodes_[n.inputs[0]];
        const Tensor& t = x.value;
        if (t.rank() == 1 || n.axis == 0) {
          std::int64_t rows = t.shape[0];
          std::int64_t cols = t.rank() == 1 ? 1 : t.shape[1];
          for (std::int64_t r = 0; r < rows; ++r)
            for (std::int64_t c = 0; c < cols; ++c)
              x.grad.data[r * cols + c] += n.grad.data[c] / static_cast<double>(rows);
        } else {
          std::int64_t cols = t.shape[1];
          for (std::int64_t r = 0; r < t.shape[0]; ++r)
            for (std::int64_t c = 0; c < cols; ++c)
              x.grad.data[r * cols + c] += n.grad.data[r] / static_cast<double>(cols);
        }
        return;
      }
      case Op::kEmbed: {
        Node& tab = nodes_[n.inputs[0]];
        std::int64_t e = tab.value.shape[1];
        for (std::size_t i = 0; i < n.ids.size(); ++i)
          for (std::int64_t c = 0; c < e; ++c)
            tab.grad.data[n.ids[i] * e + c] += n.grad.data[static_cast<std::int64_t>(i) * e + c];
        return;
      }
      case Op::kReshape: {
        Node& x = nodes_[n.inputs[0]];
        for (std::size_t i = 0; i < n.grad.data.size(); ++i) x.grad.data[i] += n.grad.data[i];
        return;
      }
    }
  }

  std::vector<Node> nodes_;
  ParamStore* store_ = nullptr;
  std::map<std::string, int> param_nodes_;
};

// Label-smoothed cross-entropy against an index target. The smoothed
// distribution puts 1-eps on the target and eps/(V-1) elsewhere.
inline Value cross_entropy(Tape& g, Value logits, int target, double smoothing_eps) {
  const Tensor& t = g.value(logits);
  check(t.rank() == 1 || (t.rank() == 2 && t.shape[0] == 1),
        "cross_entropy: logits must be one row, got ", shape_str(t.shape));
  std::int64_t v = t.numel();
  check(target >= 0 && target < v, "cross_entropy: target ", target, " out of range [0,", v, ")");
  check(smoothing_eps >= 0.0 && smoothing_eps < 1.0, "cross_entropy: smoothing_eps ", smoothing_eps,
        " outside [0,1)");
  check(smoothing_eps == 0.0 || v >= 2, "cross_entropy: smoothing needs at least 2 classes");
  Tensor q({v, 1});
  double off = v >= 2 ? smoothing_eps / static_cast<double>(v - 1) : 0.0;
  for (std::int64_t k = 0; k < v; ++k) q.data[k] = off;
  q.data[target] = 1.0 - smoothing_eps;
  Value ls = g.log_softmax(g.reshape(logits, {1, v}));
  Value dot = g.matmul(ls, g.input(std::move(q)));
  return g.reshape(g.mul_scalar(dot, -1.0), {1});
}

}  // namespace sluf
