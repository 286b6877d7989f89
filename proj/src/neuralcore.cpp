/* Copyright 2026 The multiesc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "multiesc/neuralcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "multiesc/error.hpp"

namespace multiesc::nn {

namespace {

[[noreturn]] void shape_error(const std::string& what) {
  throw Error("nn", "ShapeMismatch", what);
}

void require_same_shape(Var a, Var b, const char* op) {
  if (!a.value().same_shape(b.value())) shape_error(std::string(op) + ": operand shapes differ");
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw Error("nn", "InvalidVar", "operation on an unbound variable");
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  Tape& t = tape_of(a);
  if (b.tape() != &t) throw Error("nn", "InvalidVar", "operands live on different tapes");
  return t;
}

bool needs(Tape& t, int id) { return t.node(id).requires_grad; }

void add_into(Matrix& dst, const Matrix& src, double s = 1.0) {
  auto d = dst.data();
  auto x = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s * x[i];
}

}  // namespace

// ---------------------------------------------------------------------------
// ParamStore

Parameter& ParamStore::add(const std::string& name, Matrix value) {
  if (params_.count(name)) throw Error("nn", "DuplicateParameter", name);
  Parameter p;
  p.name = name;
  p.grad = Matrix(value.rows(), value.cols());
  p.value = std::move(value);
  return params_.emplace(name, std::move(p)).first->second;
}

Parameter& ParamStore::add_uniform(const std::string& name, std::size_t rows, std::size_t cols,
                                   Rng& rng) {
  return add_uniform(name, rows, cols, 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(rows, 1))), rng);
}

Parameter& ParamStore::add_uniform(const std::string& name, std::size_t rows, std::size_t cols,
                                   double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (auto& x : m.data()) x = rng.uniform(-bound, bound);
  return add(name, std::move(m));
}

Parameter& ParamStore::get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("nn", "UnknownParameter", name);
  return it->second;
}

const Parameter& ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("nn", "UnknownParameter", name);
  return it->second;
}

Parameter& ParamStore::owned(const Parameter* p) {
  auto it = params_.find(p->name);
  if (it == params_.end() || &it->second != p) {
    throw Error("nn", "UnknownParameter", p->name + " is not owned by this store");
  }
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [name, p] : params_) {
    if (!p.grad.same_shape(p.value)) p.grad = Matrix(p.value.rows(), p.value.cols());
    p.grad.fill(0.0);
  }
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

nlohmann::json params_to_json(const ParamStore& store) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, p] : store.params()) {
    nlohmann::json values = nlohmann::json::array();
    for (double v : p.value.data()) values.push_back(v);
    params[name] = {{"shape", {p.value.rows(), p.value.cols()}}, {"values", std::move(values)}};
  }
  return {{"format", "multiesc-params"}, {"version", kCheckpointVersion}, {"params", std::move(params)}};
}

ParamStore params_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "multiesc-params") {
      throw Error("nn", "Corrupt", "not a parameter checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw Error("nn", "VersionMismatch",
                  "checkpoint version " + j.at("version").dump() + ", expected " +
                      std::to_string(kCheckpointVersion));
    }
    ParamStore store;
    for (const auto& [name, entry] : j.at("params").items()) {
      const auto& shape = entry.at("shape");
      const auto rows = shape.at(0).get<std::size_t>();
      const auto cols = shape.at(1).get<std::size_t>();
      auto values = entry.at("values").get<std::vector<double>>();
      if (values.size() != rows * cols) {
        throw Error("nn", "Corrupt", name + ": value count does not match shape");
      }
      store.add(name, Matrix(rows, cols, std::move(values)));
    }
    return store;
  } catch (const nlohmann::json::exception& e) {
    throw Error("nn", "Corrupt", e.what());
  }
}

// ---------------------------------------------------------------------------
// Tape

const Matrix& Var::value() const { return tape_->node(id_).value(); }
const Matrix& Var::grad() const { return tape_->node(id_).grad; }

Mask Mask::causal(std::size_t n) {
  Mask m{n, n, std::vector<std::uint8_t>(n * n, 0)};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c <= r; ++c) m.keep[r * n + c] = 1;
  }
  return m;
}

Mask Mask::prefix(std::size_t rows, std::size_t cols, std::size_t valid) {
  Mask m{rows, cols, std::vector<std::uint8_t>(rows * cols, 0)};
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < std::min(valid, cols); ++c) m.keep[r * cols + c] = 1;
  }
  return m;
}

Var Tape::constant(Matrix value) {
  auto n = std::make_unique<Node>();
  n->own = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(const Parameter& p) {
  auto n = std::make_unique<Node>();
  n->ref = &p.value;
  n->param = &p;
  n->requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::push(Matrix value, std::vector<int> parents, std::function<void(Tape&, int)> backward) {
  auto n = std::make_unique<Node>();
  n->own = std::move(value);
  const int self = static_cast<int>(nodes_.size());
  for (int p : parents) {
    if (p < 0 || p >= self) throw Error("nn", "GraphCycle", "parent does not precede its child");
    if (nodes_[static_cast<std::size_t>(p)]->requires_grad) n->requires_grad = true;
  }
  n->parents = std::move(parents);
  if (n->requires_grad) n->backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, self);
}

Matrix& Tape::grad_of(int id) {
  Node& n = node(id);
  if (n.grad.empty() && !n.value().empty()) n.grad = Matrix(n.value().rows(), n.value().cols());
  return n.grad;
}

void Tape::sweep(Var loss) {
  if (loss.tape() != this) throw Error("nn", "InvalidVar", "loss belongs to another tape");
  if (loss.value().size() != 1) shape_error("backward needs a 1x1 loss");
  for (auto& n : nodes_) n->grad = Matrix();
  grad_of(loss.id())[0] = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = node(id);
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    for (int p : n.parents) {
      if (p >= id) throw Error("nn", "GraphCycle", "parent does not precede its child");
    }
    n.backward(*this, id);
  }
}

void Tape::backward(Var loss) { sweep(loss); }

void Tape::backward(Var loss, ParamStore& store) {
  sweep(loss);
  for (auto& n : nodes_) {
    if (!n->param || n->grad.empty()) continue;
    Parameter& p = store.owned(n->param);
    if (!p.grad.same_shape(p.value)) p.grad = Matrix(p.value.rows(), p.value.cols());
    add_into(p.grad, n->grad);
  }
}

// ---------------------------------------------------------------------------
// Ops

Var detach(Var x) { return tape_of(x).constant(x.value()); }

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  Matrix out;
  kernels::gemm(a.value(), false, b.value(), false, out, false);
  const int ia = a.id(), ib = b.id();
  return t.push(std::move(out), {ia, ib}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    if (needs(t, ia)) kernels::gemm(g, false, t.node(ib).value(), true, t.grad_of(ia), true);
    if (needs(t, ib)) kernels::gemm(t.node(ia).value(), true, g, false, t.grad_of(ib), true);
  });
}

Var transpose(Var x) {
  Tape& t = tape_of(x);
  const Matrix& v = x.value();
  Matrix out(v.cols(), v.rows());
  for (std::size_t r = 0; r < v.rows(); ++r) {
    for (std::size_t c = 0; c < v.cols(); ++c) out(c, r) = v(r, c);
  }
  const int ix = x.id();
  return t.push(std::move(out), {ix}, [ix](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    Matrix& gx = t.grad_of(ix);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) gx(c, r) += g(r, c);
    }
  });
}

namespace {

// Elementwise binary op with per-element partials.
template <typename F, typename DA, typename DB>
Var binary(Var a, Var b, const char* name, F f, DA da, DB db) {
  Tape& t = tape_of(a, b);
  require_same_shape(a, b, name);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i], bv[i]);
  const int ia = a.id(), ib = b.id();
  return t.push(std::move(out), {ia, ib}, [ia, ib, da, db](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    const Matrix& av = t.node(ia).value();
    const Matrix& bv = t.node(ib).value();
    if (needs(t, ia)) {
      Matrix& ga = t.grad_of(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * da(av[i], bv[i]);
    }
    if (needs(t, ib)) {
      Matrix& gb = t.grad_of(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * db(av[i], bv[i]);
    }
  });
}

// Elementwise unary op whose derivative is expressed through (x, y).
template <typename F, typename D>
Var unary(Var x, F f, D d) {
  Tape& t = tape_of(x);
  const Matrix& xv = x.value();
  Matrix out(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xv[i]);
  const int ix = x.id();
  return t.push(std::move(out), {ix}, [ix, d](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    const Matrix& y = t.node(self).value();
    const Matrix& xv = t.node(ix).value();
    Matrix& gx = t.grad_of(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * d(xv[i], y[i]);
  });
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

}  // namespace

Var add(Var a, Var b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var scale(Var x, double s) {
  return unary(
      x, [s](double v) { return s * v; }, [s](double, double) { return s; });
}

Var one_minus(Var x) {
  return unary(
      x, [](double v) { return 1.0 - v; }, [](double, double) { return -1.0; });
}

Var sigmoid(Var x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var gelu(Var x) {
  return unary(
      x,
      [](double v) { return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v))); },
      [](double v, double) {
        const double th = std::tanh(kGeluC * (v + kGeluA * v * v * v));
        return 0.5 * (1.0 + th) +
               0.5 * v * (1.0 - th * th) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
      });
}

Var add_bias(Var x, Var bias) {
  Tape& t = tape_of(x, bias);
  const Matrix& xv = x.value();
  const Matrix& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) shape_error("add_bias: bias must be 1 x cols(x)");
  Matrix out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv[c];
  }
  const int ix = x.id(), ib = bias.id();
  return t.push(std::move(out), {ix, ib}, [ix, ib](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    if (needs(t, ix)) add_into(t.grad_of(ix), g);
    if (needs(t, ib)) {
      Matrix& gb = t.grad_of(ib);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
      }
    }
  });
}

Var softmax_rows(Var x, const Mask* mask) {
  Tape& t = tape_of(x);
  const Matrix& xv = x.value();
  if (mask && (mask->rows != xv.rows() || mask->cols != xv.cols())) {
    shape_error("softmax_rows: mask shape differs from input");
  }
  Matrix out(xv.rows(), xv.cols());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < xv.cols(); ++c) {
      if (!mask || (*mask)(r, c)) mx = std::max(mx, xv(r, c));
    }
    if (!std::isfinite(mx)) continue;  // fully masked row stays zero
    double total = 0.0;
    for (std::size_t c = 0; c < xv.cols(); ++c) {
      if (mask && !(*mask)(r, c)) continue;
      out(r, c) = std::exp(xv(r, c) - mx);
      total += out(r, c);
    }
    for (std::size_t c = 0; c < xv.cols(); ++c) out(r, c) /= total;
  }
  const int ix = x.id();
  return t.push(std::move(out), {ix}, [ix](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    const Matrix& y = t.node(self).value();
    Matrix& gx = t.grad_of(ix);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += y(r, c) * g(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) gx(r, c) += y(r, c) * (g(r, c) - dot);
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  Tape& t = tape_of(x, gain);
  if (bias.tape() != &t) throw Error("nn", "InvalidVar", "operands live on different tapes");
  const Matrix& xv = x.value();
  const std::size_t n = xv.cols();
  if (gain.value().rows() != 1 || gain.value().cols() != n || bias.value().rows() != 1 ||
      bias.value().cols() != n) {
    shape_error("layer_norm: gain and bias must be 1 x cols(x)");
  }
  Matrix xhat(xv.rows(), n);
  std::vector<double> inv(xv.rows());
  Matrix out(xv.rows(), n);
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    double mu = 0.0;
    for (std::size_t c = 0; c < n; ++c) mu += xv(r, c);
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t c = 0; c < n; ++c) var += (xv(r, c) - mu) * (xv(r, c) - mu);
    var /= static_cast<double>(n);
    inv[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < n; ++c) {
      xhat(r, c) = (xv(r, c) - mu) * inv[r];
      out(r, c) = gain.value()[c] * xhat(r, c) + bias.value()[c];
    }
  }
  const int ix = x.id(), ig = gain.id(), ib = bias.id();
  return t.push(std::move(out), {ix, ig, ib},
                [ix, ig, ib, xhat = std::move(xhat), inv = std::move(inv)](Tape& t, int self) {
                  const Matrix& g = t.node(self).grad;
                  const Matrix& gv = t.node(ig).value();
                  const std::size_t n = g.cols();
                  if (needs(t, ig) || needs(t, ib)) {
                    for (std::size_t r = 0; r < g.rows(); ++r) {
                      for (std::size_t c = 0; c < n; ++c) {
                        if (needs(t, ig)) t.grad_of(ig)[c] += g(r, c) * xhat(r, c);
                        if (needs(t, ib)) t.grad_of(ib)[c] += g(r, c);
                      }
                    }
                  }
                  if (!needs(t, ix)) return;
                  Matrix& gx = t.grad_of(ix);
                  std::vector<double> dxhat(n);
                  for (std::size_t r = 0; r < g.rows(); ++r) {
                    double s1 = 0.0, s2 = 0.0;
                    for (std::size_t c = 0; c < n; ++c) {
                      dxhat[c] = g(r, c) * gv[c];
                      s1 += dxhat[c];
                      s2 += dxhat[c] * xhat(r, c);
                    }
                    const double nn = static_cast<double>(n);
                    for (std::size_t c = 0; c < n; ++c) {
                      gx(r, c) += inv[r] / nn * (nn * dxhat[c] - s1 - xhat(r, c) * s2);
                    }
                  }
                });
}

Var concat_cols(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows()) shape_error("concat_cols: row counts differ");
  const std::size_t ca = av.cols(), cb = bv.cols();
  Matrix out(av.rows(), ca + cb);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < ca; ++c) out(r, c) = av(r, c);
    for (std::size_t c = 0; c < cb; ++c) out(r, ca + c) = bv(r, c);
  }
  const int ia = a.id(), ib = b.id();
  return t.push(std::move(out), {ia, ib}, [ia, ib, ca, cb](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    for (std::size_t r = 0; r < g.rows(); ++r) {
      if (needs(t, ia)) {
        Matrix& ga = t.grad_of(ia);
        for (std::size_t c = 0; c < ca; ++c) ga(r, c) += g(r, c);
      }
      if (needs(t, ib)) {
        Matrix& gb = t.grad_of(ib);
        for (std::size_t c = 0; c < cb; ++c) gb(r, c) += g(r, ca + c);
      }
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) shape_error("concat_rows: no inputs");
  Tape& t = tape_of(parts.front());
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  std::vector<int> ids;
  for (const auto& p : parts) {
    if (p.tape() != &t) throw Error("nn", "InvalidVar", "operands live on different tapes");
    if (p.cols() != cols) shape_error("concat_rows: column counts differ");
    rows += p.rows();
    ids.push_back(p.id());
  }
  Matrix out(rows, cols);
  std::size_t at = 0;
  for (const auto& p : parts) {
    const auto src = p.value().data();
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(at * cols));
    at += p.rows();
  }
  return t.push(std::move(out), ids, [ids](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    std::size_t offset = 0;
    for (int id : ids) {
      const std::size_t n = t.node(id).value().size();
      if (needs(t, id)) {
        Matrix& gp = t.grad_of(id);
        for (std::size_t i = 0; i < n; ++i) gp[i] += g[offset + i];
      }
      offset += n;
    }
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  Tape& t = tape_of(x);
  const Matrix& xv = x.value();
  if (begin + count > xv.cols()) shape_error("slice_cols: range exceeds columns");
  Matrix out(xv.rows(), count);
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    for (std::size_t c = 0; c < count; ++c) out(r, c) = xv(r, begin + c);
  }
  const int ix = x.id();
  return t.push(std::move(out), {ix}, [ix, begin, count](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    Matrix& gx = t.grad_of(ix);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < count; ++c) gx(r, begin + c) += g(r, c);
    }
  });
}

Var slice_rows(Var x, std::size_t begin, std::size_t count) {
  Tape& t = tape_of(x);
  const Matrix& xv = x.value();
  if (begin + count > xv.rows()) shape_error("slice_rows: range exceeds rows");
  const std::size_t cols = xv.cols();
  std::vector<double> data(xv.data().begin() + static_cast<std::ptrdiff_t>(begin * cols),
                           xv.data().begin() + static_cast<std::ptrdiff_t>((begin + count) * cols));
  const int ix = x.id();
  return t.push(Matrix(count, cols, std::move(data)), {ix}, [ix, begin, cols](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    Matrix& gx = t.grad_of(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[begin * cols + i] += g[i];
  });
}

Var sum(Var x) {
  Tape& t = tape_of(x);
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const int ix = x.id();
  return t.push(Matrix(1, 1, s), {ix}, [ix](Tape& t, int self) {
    const double g = t.node(self).grad[0];
    Matrix& gx = t.grad_of(ix);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

Var mean(Var x) {
  const auto n = static_cast<double>(std::max<std::size_t>(x.value().size(), 1));
  return scale(sum(x), 1.0 / n);
}

Var embedding(Var table, const std::vector<int>& ids) {
  Tape& t = tape_of(table);
  const Matrix& tv = table.value();
  const std::size_t cols = tv.cols();
  Matrix out(ids.size(), cols);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= tv.rows()) {
      throw Error("nn", "IndexOutOfRange", "embedding id " + std::to_string(ids[r]));
    }
    const auto src = tv.row(static_cast<std::size_t>(ids[r]));
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  const int it = table.id();
  return t.push(std::move(out), {it}, [it, ids](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    Matrix& gt = t.grad_of(it);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) gt(static_cast<std::size_t>(ids[r]), c) += g(r, c);
    }
  });
}

Var cross_entropy(Var logits, const std::vector<int>& targets) {
  Tape& t = tape_of(logits);
  const Matrix& lv = logits.value();
  if (targets.size() != lv.rows()) shape_error("cross_entropy: one target per row required");
  Matrix probs(lv.rows(), lv.cols());
  double loss = 0.0;
  for (std::size_t r = 0; r < lv.rows(); ++r) {
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= lv.cols()) {
      throw Error("nn", "IndexOutOfRange", "target " + std::to_string(targets[r]));
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < lv.cols(); ++c) mx = std::max(mx, lv(r, c));
    double total = 0.0;
    for (std::size_t c = 0; c < lv.cols(); ++c) {
      probs(r, c) = std::exp(lv(r, c) - mx);
      total += probs(r, c);
    }
    for (std::size_t c = 0; c < lv.cols(); ++c) probs(r, c) /= total;
    loss -= lv(r, static_cast<std::size_t>(targets[r])) - mx - std::log(total);
  }
  const double n = static_cast<double>(std::max<std::size_t>(lv.rows(), 1));
  const int il = logits.id();
  return t.push(Matrix(1, 1, loss / n), {il},
                [il, targets, n, probs = std::move(probs)](Tape& t, int self) {
                  const double g = t.node(self).grad[0];
                  Matrix& gl = t.grad_of(il);
                  for (std::size_t r = 0; r < probs.rows(); ++r) {
                    for (std::size_t c = 0; c < probs.cols(); ++c) {
                      const double onehot = static_cast<int>(c) == targets[r] ? 1.0 : 0.0;
                      gl(r, c) += g * (probs(r, c) - onehot) / n;
                    }
                  }
                });
}

Var mse(Var prediction, const Matrix& target) {
  Tape& t = tape_of(prediction);
  const Matrix& pv = prediction.value();
  if (!pv.same_shape(target)) shape_error("mse: prediction and target shapes differ");
  double loss = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) loss += (pv[i] - target[i]) * (pv[i] - target[i]);
  const double n = static_cast<double>(std::max<std::size_t>(pv.size(), 1));
  const int ip = prediction.id();
  return t.push(Matrix(1, 1, loss / n), {ip}, [ip, target, n](Tape& t, int self) {
    const double g = t.node(self).grad[0];
    const Matrix& pv = t.node(ip).value();
    Matrix& gp = t.grad_of(ip);
    for (std::size_t i = 0; i < pv.size(); ++i) gp[i] += g * 2.0 * (pv[i] - target[i]) / n;
  });
}

// ---------------------------------------------------------------------------
// Layers

Var linear(Var x, Var weight, Var bias) { return add_bias(matmul(x, weight), bias); }

Linear Linear::create(ParamStore& store, const std::string& prefix, std::size_t in,
                      std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Linear l;
  l.weight = &store.add_uniform(prefix + ".weight", in, out, bound, rng);
  l.bias = &store.add_uniform(prefix + ".bias", 1, out, bound, rng);
  return l;
}

Linear Linear::bind(const ParamStore& store, const std::string& prefix) {
  return Linear{&store.get(prefix + ".weight"), &store.get(prefix + ".bias")};
}

Var Linear::forward(Tape& tape, Var x) const {
  return linear(x, tape.param(*weight), tape.param(*bias));
}

MultiHeadAttention MultiHeadAttention::create(ParamStore& store, const std::string& prefix,
                                              std::size_t d_model, int heads, Rng& rng) {
  if (heads < 1 || d_model % static_cast<std::size_t>(heads) != 0) {
    throw Error("nn", "HeadsDivisibility",
                "d_model " + std::to_string(d_model) + " not divisible by heads " + std::to_string(heads));
  }
  MultiHeadAttention m;
  m.query = Linear::create(store, prefix + ".query", d_model, d_model, rng);
  m.key = Linear::create(store, prefix + ".key", d_model, d_model, rng);
  m.value = Linear::create(store, prefix + ".value", d_model, d_model, rng);
  m.output = Linear::create(store, prefix + ".output", d_model, d_model, rng);
  m.heads = heads;
  return m;
}

MultiHeadAttention MultiHeadAttention::bind(const ParamStore& store, const std::string& prefix,
                                            int heads) {
  MultiHeadAttention m;
  m.query = Linear::bind(store, prefix + ".query");
  m.key = Linear::bind(store, prefix + ".key");
  m.value = Linear::bind(store, prefix + ".value");
  m.output = Linear::bind(store, prefix + ".output");
  m.heads = heads;
  return m;
}

Var MultiHeadAttention::forward(Tape& tape, Var q, Var k, Var v, const Mask* mask,
                                std::vector<Matrix>* weights) const {
  const std::size_t d = q.cols();
  if (k.cols() != d || v.cols() != d) shape_error("mh_attention: model widths differ");
  if (k.rows() != v.rows()) shape_error("mh_attention: keys and values differ in length");
  if (k.rows() == 0) throw Error("nn", "EmptyMemory", "attention over zero keys");
  if (heads < 1 || d % static_cast<std::size_t>(heads) != 0) {
    throw Error("nn", "HeadsDivisibility", "model width not divisible by heads");
  }
  const std::size_t dh = d / static_cast<std::size_t>(heads);
  const Var qp = query.forward(tape, q);
  const Var kp = key.forward(tape, k);
  const Var vp = value.forward(tape, v);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  if (weights) weights->clear();
  Var joined;
  for (int h = 0; h < heads; ++h) {
    const std::size_t off = static_cast<std::size_t>(h) * dh;
    const Var qh = heads == 1 ? qp : slice_cols(qp, off, dh);
    const Var kh = heads == 1 ? kp : slice_cols(kp, off, dh);
    const Var vh = heads == 1 ? vp : slice_cols(vp, off, dh);
    const Var w = softmax_rows(scale(matmul(qh, transpose(kh)), inv_sqrt), mask);
    if (weights) weights->push_back(w.value());
    const Var out = matmul(w, vh);
    joined = h == 0 ? out : concat_cols(joined, out);
  }
  return output.forward(tape, joined);
}

Var masked_self_attention(Tape& tape, const MultiHeadAttention& attn, Var x) {
  const Mask mask = Mask::causal(x.rows());
  return attn.forward(tape, x, x, x, &mask);
}

GateFusion GateFusion::create(ParamStore& store, const std::string& prefix, std::size_t d,
                              Rng& rng) {
  return GateFusion{Linear::create(store, prefix + ".gate", 2 * d, d, rng)};
}

GateFusion GateFusion::bind(const ParamStore& store, const std::string& prefix) {
  return GateFusion{Linear::bind(store, prefix + ".gate")};
}

Var GateFusion::forward(Tape& tape, Var h, Var u) const {
  require_same_shape(h, u, "gate_fusion");
  const Var mu = sigmoid(gate.forward(tape, concat_cols(h, u)));
  return add(mul(mu, h), mul(one_minus(mu), u));
}

FeedForwardBlock FeedForwardBlock::create(ParamStore& store, const std::string& prefix,
                                          std::size_t d, std::size_t d_hidden, Rng& rng) {
  FeedForwardBlock f;
  f.inner = Linear::create(store, prefix + ".inner", d, d_hidden, rng);
  f.outer = Linear::create(store, prefix + ".outer", d_hidden, d, rng);
  f.ln_gain = &store.add(prefix + ".ln_gain", Matrix(1, d, 1.0));
  f.ln_bias = &store.add(prefix + ".ln_bias", Matrix(1, d, 0.0));
  return f;
}

FeedForwardBlock FeedForwardBlock::bind(const ParamStore& store, const std::string& prefix) {
  FeedForwardBlock f;
  f.inner = Linear::bind(store, prefix + ".inner");
  f.outer = Linear::bind(store, prefix + ".outer");
  f.ln_gain = &store.get(prefix + ".ln_gain");
  f.ln_bias = &store.get(prefix + ".ln_bias");
  return f;
}

Var FeedForwardBlock::forward(Tape& tape, Var x) const {
  const Var hidden = outer.forward(tape, gelu(inner.forward(tape, x)));
  return layer_norm(add(x, hidden), tape.param(*ln_gain), tape.param(*ln_bias));
}

Lstm Lstm::create(ParamStore& store, const std::string& prefix, std::size_t d_in,
                  std::size_t hidden, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  Lstm l;
  l.input_weight = &store.add_uniform(prefix + ".input_weight", d_in, 4 * hidden, bound, rng);
  l.hidden_weight = &store.add_uniform(prefix + ".hidden_weight", hidden, 4 * hidden, bound, rng);
  l.bias = &store.add_uniform(prefix + ".bias", 1, 4 * hidden, bound, rng);
  l.hidden = hidden;
  return l;
}

Lstm Lstm::bind(const ParamStore& store, const std::string& prefix) {
  Lstm l;
  l.input_weight = &store.get(prefix + ".input_weight");
  l.hidden_weight = &store.get(prefix + ".hidden_weight");
  l.bias = &store.get(prefix + ".bias");
  l.hidden = l.hidden_weight->value.rows();
  return l;
}

Var Lstm::forward(Tape& tape, Var sequence) const {
  if (sequence.rows() == 0) throw Error("nn", "EmptySequence", "LSTM over an empty sequence");
  const std::size_t h = hidden;
  const Var projected = linear(sequence, tape.param(*input_weight), tape.param(*bias));
  const Var wh = tape.param(*hidden_weight);
  Var state = tape.constant(Matrix(1, h));
  Var cell = tape.constant(Matrix(1, h));
  std::vector<Var> outputs;
  outputs.reserve(sequence.rows());
  for (std::size_t t = 0; t < sequence.rows(); ++t) {
    const Var z = add(slice_rows(projected, t, 1), matmul(state, wh));
    const Var in_gate = sigmoid(slice_cols(z, 0, h));
    const Var forget_gate = sigmoid(slice_cols(z, h, h));
    const Var candidate = tanh(slice_cols(z, 2 * h, h));
    const Var out_gate = sigmoid(slice_cols(z, 3 * h, h));
    cell = add(mul(forget_gate, cell), mul(in_gate, candidate));
    state = mul(out_gate, tanh(cell));
    outputs.push_back(state);
  }
  return concat_rows(outputs);
}

AttentionResult luong_attention(Var query, Var memory, Var w_a, std::optional<std::size_t> valid) {
  const std::size_t n = memory.rows();
  if (n == 0 || (valid && *valid == 0)) throw Error("nn", "EmptyMemory", "attention over no states");
  if (query.rows() != 1) shape_error("luong_attention: query must be a single row");
  if (w_a.rows() != memory.cols() || w_a.cols() != query.cols()) {
    shape_error("luong_attention: W_a must be d_memory x d_query");
  }
  const Var scores = transpose(matmul(memory, matmul(w_a, transpose(query))));  // 1 x n
  Var weights_row;
  if (valid && *valid < n) {
    const Mask mask = Mask::prefix(1, n, *valid);
    weights_row = softmax_rows(scores, &mask);
  } else {
    weights_row = softmax_rows(scores);
  }
  return AttentionResult{transpose(weights_row), matmul(weights_row, memory)};
}

// ---------------------------------------------------------------------------
// Optimisation and verification

void AdamW::step(ParamStore& store) const {
  const auto t = static_cast<double>(++store.adam_steps);
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  for (auto& [name, p] : store.params()) {
    if (!p.adam_m.same_shape(p.value)) p.adam_m = Matrix(p.value.rows(), p.value.cols());
    if (!p.adam_v.same_shape(p.value)) p.adam_v = Matrix(p.value.rows(), p.value.cols());
    if (!p.grad.same_shape(p.value)) p.grad = Matrix(p.value.rows(), p.value.cols());
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      p.adam_m[i] = beta1 * p.adam_m[i] + (1.0 - beta1) * g;
      p.adam_v[i] = beta2 * p.adam_v[i] + (1.0 - beta2) * g * g;
      const double m_hat = p.adam_m[i] / c1;
      const double v_hat = p.adam_v[i] / c2;
      p.value[i] -= lr * (m_hat / (std::sqrt(v_hat) + eps) + weight_decay * p.value[i]);
    }
  }
}

GradCheckReport finite_diff_check(ParamStore& store, const LossFn& loss, double eps, double tol,
                                  std::size_t coords_per_param, std::uint64_t seed, double floor) {
  store.zero_grad();
  {
    Tape tape;
    const Var l = loss(tape, store);
    tape.backward(l, store);
  }
  auto evaluate = [&] {
    Tape tape;
    return loss(tape, store).scalar();
  };

  Rng rng(seed);
  GradCheckReport report;
  for (auto& [name, p] : store.params()) {
    std::vector<std::size_t> coords(p.value.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    if (coords.size() > coords_per_param) {
      rng.shuffle(coords);
      coords.resize(coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    GradCheckEntry entry{name, coords.size(), 0.0};
    for (std::size_t i : coords) {
      const double original = p.value[i];
      p.value[i] = original + eps;
      const double up = evaluate();
      p.value[i] = original - eps;
      const double down = evaluate();
      p.value[i] = original;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p.grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      entry.max_rel_error = std::max(entry.max_rel_error, std::abs(analytic - numeric) / denom);
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

}  // namespace multiesc::nn
