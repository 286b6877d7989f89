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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "multiesc/matrix.hpp"
#include "multiesc/rng.hpp"

namespace multiesc::nn {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
};

// Named parameters with same-shape gradient buffers. Iteration order is the
// lexicographic name order, which fixes the checkpoint layout.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  // Errors: nn.DuplicateParameter.
  Parameter& add(const std::string& name, Matrix value);
  // uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) with fan_in = rows.
  Parameter& add_uniform(const std::string& name, std::size_t rows, std::size_t cols, Rng& rng);
  Parameter& add_uniform(const std::string& name, std::size_t rows, std::size_t cols,
                         double bound, Rng& rng);

  // Errors: nn.UnknownParameter.
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }

  // Mutable access to a parameter this store owns, as seen through a const
  // pointer recorded on a tape.
  Parameter& owned(const Parameter* p);

  void zero_grad();
  std::size_t num_scalars() const;
  std::map<std::string, Parameter>& params() { return params_; }
  const std::map<std::string, Parameter>& params() const { return params_; }

  std::int64_t adam_steps = 0;

 private:
  std::map<std::string, Parameter> params_;
};

inline constexpr int kCheckpointVersion = 1;

// {"format":"multiesc-params","version":1,"params":{name:{"shape":[r,c],"values":[...]}}}
nlohmann::json params_to_json(const ParamStore& store);
// Errors: nn.VersionMismatch, nn.Corrupt.
ParamStore params_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Reverse-mode tape.

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  const Matrix& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const { return value()[0]; }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Row-by-column keep mask for softmax_rows; 1 keeps an entry.
struct Mask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> keep;

  static Mask causal(std::size_t n);
  // Every row sees only the first `valid` columns.
  static Mask prefix(std::size_t rows, std::size_t cols, std::size_t valid);
  bool operator()(std::size_t r, std::size_t c) const { return keep[r * cols + c] != 0; }
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var param(const Parameter& p);

  // Reverse sweep from a 1x1 loss. Node gradients are recomputed on every
  // call; parameter gradients in `store` accumulate until zero_grad().
  // Errors: nn.ShapeMismatch (non-scalar loss), nn.GraphCycle.
  void backward(Var loss, ParamStore& store);
  // Same sweep without touching any store; node grads stay readable.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  // Internal: used by the op implementations.
  struct Node {
    Matrix own;
    const Matrix* ref = nullptr;  // parameter leaves read the store in place
    Matrix grad;
    const Matrix& value() const { return ref ? *ref : own; }
    bool requires_grad = false;
    const Parameter* param = nullptr;
    std::vector<int> parents;
    std::function<void(Tape&, int)> backward;
  };
  Var push(Matrix value, std::vector<int> parents, std::function<void(Tape&, int)> backward);
  Node& node(int id) { return *nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(int id) const { return *nodes_[static_cast<std::size_t>(id)]; }
  // Gradient buffer of a node, allocated on first use.
  Matrix& grad_of(int id);

 private:
  void sweep(Var loss);
  std::vector<std::unique_ptr<Node>> nodes_;
};

// ---------------------------------------------------------------------------
// Differentiable ops. Shape errors raise nn.ShapeMismatch.

Var detach(Var x);
Var matmul(Var a, Var b);
Var transpose(Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);          // elementwise
Var scale(Var x, double s);
Var one_minus(Var x);
Var add_bias(Var x, Var bias);  // bias is 1 x cols, broadcast over rows
Var sigmoid(Var x);
Var tanh(Var x);
Var gelu(Var x);                // tanh approximation
Var softmax_rows(Var x, const Mask* mask = nullptr);
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
Var concat_cols(Var a, Var b);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(Var x, std::size_t begin, std::size_t count);
Var slice_rows(Var x, std::size_t begin, std::size_t count);
Var sum(Var x);
Var mean(Var x);
// Gathers rows of `table`; Errors: nn.IndexOutOfRange.
Var embedding(Var table, const std::vector<int>& ids);
// Mean over rows of -log softmax(logits)[target].
Var cross_entropy(Var logits, const std::vector<int>& targets);
// Mean squared error against constant targets of the same shape.
Var mse(Var prediction, const Matrix& target);

// ---------------------------------------------------------------------------
// Layers. create() registers parameters under `prefix`, bind() reattaches to
// an existing store (after loading a checkpoint).

struct Linear {
  const Parameter* weight = nullptr;  // in x out
  const Parameter* bias = nullptr;    // 1 x out

  static Linear create(ParamStore& store, const std::string& prefix, std::size_t in,
                       std::size_t out, Rng& rng);
  static Linear bind(const ParamStore& store, const std::string& prefix);
  Var forward(Tape& tape, Var x) const;
};

// xW + b as a free function over tape values.
Var linear(Var x, Var weight, Var bias);

struct MultiHeadAttention {
  Linear query, key, value, output;
  int heads = 1;

  // Errors: nn.HeadsDivisibility.
  static MultiHeadAttention create(ParamStore& store, const std::string& prefix,
                                   std::size_t d_model, int heads, Rng& rng);
  static MultiHeadAttention bind(const ParamStore& store, const std::string& prefix, int heads);

  // Per-head projections, scaled dot-product attention, concatenation and
  // output projection. When `weights` is given it receives one rows(q) x
  // rows(k) matrix per head.
  Var forward(Tape& tape, Var q, Var k, Var v, const Mask* mask = nullptr,
              std::vector<Matrix>* weights = nullptr) const;
};

// Position i attends to positions <= i only.
Var masked_self_attention(Tape& tape, const MultiHeadAttention& attn, Var x);

struct GateFusion {
  Linear gate;  // 2d -> d

  static GateFusion create(ParamStore& store, const std::string& prefix, std::size_t d,
                           Rng& rng);
  static GateFusion bind(const ParamStore& store, const std::string& prefix);
  // mu = sigmoid([h;u] W + b); mu*h + (1-mu)*u.
  Var forward(Tape& tape, Var h, Var u) const;
};

struct FeedForwardBlock {
  Linear inner, outer;
  const Parameter* ln_gain = nullptr;
  const Parameter* ln_bias = nullptr;

  static FeedForwardBlock create(ParamStore& store, const std::string& prefix, std::size_t d,
                                 std::size_t d_hidden, Rng& rng);
  static FeedForwardBlock bind(const ParamStore& store, const std::string& prefix);
  // layer_norm(x + outer(gelu(inner(x)))).
  Var forward(Tape& tape, Var x) const;
};

struct Lstm {
  const Parameter* input_weight = nullptr;   // d_in x 4h, gate order i f g o
  const Parameter* hidden_weight = nullptr;  // h x 4h
  const Parameter* bias = nullptr;           // 1 x 4h
  std::size_t hidden = 0;

  static Lstm create(ParamStore& store, const std::string& prefix, std::size_t d_in,
                     std::size_t hidden, Rng& rng);
  static Lstm bind(const ParamStore& store, const std::string& prefix);
  // One hidden row per input row; zero initial state. Errors: nn.EmptySequence.
  Var forward(Tape& tape, Var sequence) const;
};

struct AttentionResult {
  Var weights;  // n x 1, on the simplex over the first `valid` rows
  Var context;  // 1 x d_h
};

// a_i = softmax_i(h_i^T W_a q); rows at or beyond `valid` get zero weight.
// Errors: nn.EmptyMemory, nn.ShapeMismatch.
AttentionResult luong_attention(Var query, Var memory, Var w_a,
                                std::optional<std::size_t> valid = std::nullopt);

// ---------------------------------------------------------------------------
// Optimisation and verification.

struct AdamW {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  // Decoupled weight decay; bias-corrected moments.
  void step(ParamStore& store) const;
};

struct GradCheckEntry {
  std::string name;
  std::size_t coords_checked = 0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool passed = false;
};

using LossFn = std::function<Var(Tape&, const ParamStore&)>;

// Central differences on up to `coords_per_param` sampled coordinates per
// parameter. Relative error is |analytic - numeric| / max(|analytic|,
// |numeric|, floor).
GradCheckReport finite_diff_check(ParamStore& store, const LossFn& loss, double eps = 1e-4,
                                  double tol = 1e-4, std::size_t coords_per_param = 16,
                                  std::uint64_t seed = 0, double floor = 1e-3);

}  // namespace multiesc::nn
