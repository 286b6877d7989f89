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

#include "gradcases.hpp"

#include <functional>
#include <map>
#include <stdexcept>

#include "multiesc/feedback.hpp"
#include "multiesc/seqmodel.hpp"

namespace multiesc::testing {

namespace {

using namespace multiesc::nn;

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = scale * rng.uniform(-1.0, 1.0);
  return m;
}

std::size_t dim(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.index(hi - lo + 1); }

Var p(Tape& t, const ParamStore& s, const char* name) { return t.param(s.get(name)); }

// Contracts an output with fixed random weights so that ops whose plain sum
// is constant (softmax rows, layer norm) still see a gradient.
Var probe(Var out, const Matrix& weights) { return sum(mul(out, out.tape()->constant(weights))); }

struct Setup {
  ParamStore store;
  LossFn loss;
};

using Builder = std::function<void(Setup&, Rng&)>;

// One input parameter "x" of random shape passed through a unary op.
Builder unary(std::function<Var(Var)> op, double scale = 1.0) {
  return [op, scale](Setup& s, Rng& rng) {
    const std::size_t r = dim(rng, 1, 4), c = dim(rng, 1, 4);
    s.store.add("x", random_matrix(r, c, rng, scale));
    const Matrix w = random_matrix(r, c, rng);
    s.loss = [op, w](Tape& t, const ParamStore& st) { return probe(op(p(t, st, "x")), w); };
  };
}

// Reductions to 1x1, applied to a weighted square so the gradient varies.
Builder reduction(std::function<Var(Var)> op) {
  return [op](Setup& s, Rng& rng) {
    const std::size_t r = dim(rng, 1, 4), c = dim(rng, 1, 4);
    s.store.add("x", random_matrix(r, c, rng));
    const Matrix w = random_matrix(r, c, rng);
    s.loss = [op, w](Tape& t, const ParamStore& st) {
      const Var x = p(t, st, "x");
      return op(mul(mul(x, x), t.constant(w)));
    };
  };
}

Builder binary(std::function<Var(Var, Var)> op) {
  return [op](Setup& s, Rng& rng) {
    const std::size_t r = dim(rng, 1, 4), c = dim(rng, 1, 4);
    s.store.add("a", random_matrix(r, c, rng));
    s.store.add("b", random_matrix(r, c, rng));
    const Matrix w = random_matrix(r, c, rng);
    s.loss = [op, w](Tape& t, const ParamStore& st) { return probe(op(p(t, st, "a"), p(t, st, "b")), w); };
  };
}

const std::map<std::string, Builder>& registry() {
  static const std::map<std::string, Builder> cases = {
      {"matmul",
       [](Setup& s, Rng& rng) {
         const std::size_t m = dim(rng, 1, 4), k = dim(rng, 1, 4), n = dim(rng, 1, 4);
         s.store.add("a", random_matrix(m, k, rng));
         s.store.add("b", random_matrix(k, n, rng));
         const Matrix w = random_matrix(m, n, rng);
         s.loss = [w](Tape& t, const ParamStore& st) { return probe(matmul(p(t, st, "a"), p(t, st, "b")), w); };
       }},
      {"transpose",
       [](Setup& s, Rng& rng) {
         const std::size_t r = dim(rng, 1, 4), c = dim(rng, 1, 4);
         s.store.add("x", random_matrix(r, c, rng));
         const Matrix w = random_matrix(c, r, rng);
         s.loss = [w](Tape& t, const ParamStore& st) { return probe(transpose(p(t, st, "x")), w); };
       }},
      {"add", binary([](Var a, Var b) { return add(a, b); })},
      {"sub", binary([](Var a, Var b) { return sub(a, b); })},
      {"mul", binary([](Var a, Var b) { return mul(a, b); })},
      {"scale", unary([](Var x) { return scale(x, -1.7); })},
      {"one_minus", unary([](Var x) { return one_minus(x); })},
      {"sigmoid", unary([](Var x) { return sigmoid(x); }, 3.0)},
      {"tanh", unary([](Var x) { return tanh(x); }, 2.0)},
      {"gelu", unary([](Var x) { return gelu(x); }, 3.0)},
      {"softmax_rows", unary([](Var x) { return softmax_rows(x); }, 3.0)},
      {"softmax_rows_masked",
       [](Setup& s, Rng& rng) {
         const std::size_t n = dim(rng, 2, 4);
         s.store.add("x", random_matrix(n, n, rng, 3.0));
         const Matrix w = random_matrix(n, n, rng);
         s.loss = [w, n](Tape& t, const ParamStore& st) {
           const Mask mask = Mask::causal(n);
           return probe(softmax_rows(p(t, st, "x"), &mask), w);
         };
       }},
      {"sum", reduction([](Var x) { return sum(x); })},
      {"mean", reduction([](Var x) { return mean(x); })},
      {"add_bias",
       [](Setup& s, Rng& rng) {
         const std::size_t r = dim(rng, 1, 4), c = dim(rng, 1, 4);
         s.store.add("x", random_matrix(r, c, rng));
         s.store.add("b", random_matrix(1, c, rng));
         const Matrix w = random_matrix(r, c, rng);
         s.loss = [w](Tape& t, const ParamStore& st) { return probe(add_bias(p(t, st, "x"), p(t, st, "b")), w); };
       }},
      {"layer_norm",
       [](Setup& s, Rng& rng) {
         const std::size_t r = dim(rng, 1, 4), c = dim(rng, 2, 5);
         s.store.add("x", random_matrix(r, c, rng, 2.0));
         s.store.add("gain", random_matrix(1, c, rng));
         s.store.add("bias", random_matrix(1, c, rng));
         const Matrix w = random_matrix(r, c, rng);
         s.loss = [w](Tape& t, const ParamStore& st) {
           return probe(layer_norm(p(t, st, "x"), p(t, st, "gain"), p(t, st, "bias")), w);
         };
       }},
      {"concat_cols",
       [](Setup& s, Rng& rng) {
         const std::size_t r = dim(rng, 1, 4), c1 = dim(rng, 1, 3), c2 = dim(rng, 1, 3);
         s.store.add("a", random_matrix(r, c1, rng));
         s.store.add("b", random_matrix(r, c2, rng));
         const Matrix w = random_matrix(r, c1 + c2, rng);
         s.loss = [w](Tape& t, const ParamStore& st) { return probe(concat_cols(p(t, st, "a"), p(t, st, "b")), w); };
       }},
      {"concat_rows",
       [](Setup& s, Rng& rng) {
         const std::size_t c = dim(rng, 1, 4), r1 = dim(rng, 1, 3), r2 = dim(rng, 1, 3);
         s.store.add("a", random_matrix(r1, c, rng));
         s.store.add("b", random_matrix(r2, c, rng));
         const Matrix w = random_matrix(r1 + r2 + r1, c, rng);
         s.loss = [w](Tape& t, const ParamStore& st) {
           const Var a = p(t, st, "a");
           return probe(concat_rows({a, p(t, st, "b"), a}), w);
         };
       }},
      {"slice",
       [](Setup& s, Rng& rng) {
         s.store.add("x", random_matrix(4, 5, rng));
         const Matrix w = random_matrix(2, 3, rng);
         s.loss = [w](Tape& t, const ParamStore& st) { return probe(slice_rows(slice_cols(p(t, st, "x"), 1, 3), 2, 2), w); };
       }},
      {"embedding",
       [](Setup& s, Rng& rng) {
         const std::size_t v = dim(rng, 2, 6), d = dim(rng, 1, 4);
         s.store.add("table", random_matrix(v, d, rng));
         std::vector<int> ids;
         for (std::size_t i = 0; i < 5; ++i) ids.push_back(static_cast<int>(rng.index(v)));
         const Matrix w = random_matrix(ids.size(), d, rng);
         s.loss = [w, ids](Tape& t, const ParamStore& st) { return probe(embedding(p(t, st, "table"), ids), w); };
       }},
      {"cross_entropy",
       [](Setup& s, Rng& rng) {
         const std::size_t r = dim(rng, 1, 4), c = dim(rng, 2, 7);
         s.store.add("x", random_matrix(r, c, rng, 2.0));
         std::vector<int> targets;
         for (std::size_t i = 0; i < r; ++i) targets.push_back(static_cast<int>(rng.index(c)));
         s.loss = [targets](Tape& t, const ParamStore& st) { return cross_entropy(p(t, st, "x"), targets); };
       }},
      {"mse",
       [](Setup& s, Rng& rng) {
         const std::size_t r = dim(rng, 1, 4), c = dim(rng, 1, 4);
         s.store.add("x", random_matrix(r, c, rng));
         const Matrix target = random_matrix(r, c, rng);
         s.loss = [target](Tape& t, const ParamStore& st) { return mse(p(t, st, "x"), target); };
       }},
      {"linear",
       [](Setup& s, Rng& rng) {
         const std::size_t r = dim(rng, 1, 4), in = dim(rng, 1, 4), out = dim(rng, 1, 4);
         s.store.add("x", random_matrix(r, in, rng));
         Linear::create(s.store, "lin", in, out, rng);
         const Matrix w = random_matrix(r, out, rng);
         s.loss = [w](Tape& t, const ParamStore& st) {
           return probe(Linear::bind(st, "lin").forward(t, p(t, st, "x")), w);
         };
       }},
      {"mh_attention",
       [](Setup& s, Rng& rng) {
         const int heads = static_cast<int>(dim(rng, 1, 2));
         const std::size_t d = static_cast<std::size_t>(heads) * dim(rng, 1, 3);
         const std::size_t nq = dim(rng, 1, 3), nk = dim(rng, 1, 4);
         s.store.add("q", random_matrix(nq, d, rng));
         s.store.add("kv", random_matrix(nk, d, rng));
         MultiHeadAttention::create(s.store, "att", d, heads, rng);
         const Matrix w = random_matrix(nq, d, rng);
         s.loss = [w, heads](Tape& t, const ParamStore& st) {
           const auto att = MultiHeadAttention::bind(st, "att", heads);
           const Var kv = p(t, st, "kv");
           return probe(att.forward(t, p(t, st, "q"), kv, kv), w);
         };
       }},
      {"masked_self_attention",
       [](Setup& s, Rng& rng) {
         const int heads = static_cast<int>(dim(rng, 1, 2));
         const std::size_t d = static_cast<std::size_t>(heads) * dim(rng, 1, 3), n = dim(rng, 1, 4);
         s.store.add("x", random_matrix(n, d, rng));
         MultiHeadAttention::create(s.store, "att", d, heads, rng);
         const Matrix w = random_matrix(n, d, rng);
         s.loss = [w, heads](Tape& t, const ParamStore& st) {
           return probe(masked_self_attention(t, MultiHeadAttention::bind(st, "att", heads), p(t, st, "x")), w);
         };
       }},
      {"gate_fusion",
       [](Setup& s, Rng& rng) {
         const std::size_t r = dim(rng, 1, 4), d = dim(rng, 1, 4);
         s.store.add("h", random_matrix(r, d, rng));
         s.store.add("u", random_matrix(r, d, rng));
         GateFusion::create(s.store, "fuse", d, rng);
         const Matrix w = random_matrix(r, d, rng);
         s.loss = [w](Tape& t, const ParamStore& st) {
           return probe(GateFusion::bind(st, "fuse").forward(t, p(t, st, "h"), p(t, st, "u")), w);
         };
       }},
      {"ffn_block",
       [](Setup& s, Rng& rng) {
         const std::size_t r = dim(rng, 1, 4), d = dim(rng, 2, 4), hidden = dim(rng, 1, 6);
         s.store.add("x", random_matrix(r, d, rng));
         FeedForwardBlock::create(s.store, "ffn", d, hidden, rng);
         auto& gain = s.store.get("ffn.ln_gain").value;
         for (std::size_t i = 0; i < gain.size(); ++i) gain[i] = rng.uniform(0.5, 1.5);
         const Matrix w = random_matrix(r, d, rng);
         s.loss = [w](Tape& t, const ParamStore& st) {
           return probe(FeedForwardBlock::bind(st, "ffn").forward(t, p(t, st, "x")), w);
         };
       }},
      {"lstm",
       [](Setup& s, Rng& rng) {
         const std::size_t n = dim(rng, 1, 4), in = dim(rng, 1, 4), h = dim(rng, 1, 3);
         s.store.add("x", random_matrix(n, in, rng));
         Lstm::create(s.store, "lstm", in, h, rng);
         const Matrix w = random_matrix(n, h, rng);
         s.loss = [w](Tape& t, const ParamStore& st) {
           return probe(Lstm::bind(st, "lstm").forward(t, p(t, st, "x")), w);
         };
       }},
      {"luong_attention",
       [](Setup& s, Rng& rng) {
         const std::size_t n = dim(rng, 1, 4), dm = dim(rng, 1, 4), dq = dim(rng, 1, 4);
         s.store.add("q", random_matrix(1, dq, rng));
         s.store.add("m", random_matrix(n, dm, rng));
         s.store.add("w_a", random_matrix(dm, dq, rng));
         const Matrix w = random_matrix(1, dm, rng);
         const Matrix wa = random_matrix(n, 1, rng);
         const std::size_t valid = dim(rng, 1, n);
         s.loss = [w, wa, valid](Tape& t, const ParamStore& st) {
           const auto r = luong_attention(p(t, st, "q"), p(t, st, "m"), p(t, st, "w_a"), valid);
           return add(probe(r.context, w), probe(r.weights, wa));
         };
       }},
  };
  return cases;
}

GradCheckReport check_ssg(std::uint64_t seed, double eps, double tol) {
  Rng rng(seed);
  ssg::NeuralSsgConfig config;
  config.d_emb = 8;
  config.heads = 2;
  config.layers = 1 + static_cast<int>(rng.index(2));
  config.d_ff = 8;
  config.vocab_buckets = 16;
  config.num_emotions = 5;
  config.state_dim = 6;
  config.window = 6;
  config.max_plan_length = 4;
  config.seed = seed;
  ssg::NeuralSsg model(config);
  std::vector<ssg::TrainingExample> batch(2);
  const char* words[] = {"i", "feel", "sad", "today", "work", "friend"};
  for (auto& ex : batch) {
    const auto h = rng.index(4);
    for (std::size_t i = 0; i < h; ++i) ex.context.history.push_back(static_cast<int>(rng.index(8)));
    for (std::size_t i = 0; i < 1 + rng.index(5); ++i) {
      ex.context.window.push_back(words[rng.index(6)]);
      ex.context.window_emotions.push_back(static_cast<int>(rng.index(5)));
    }
    for (std::size_t i = 0; i < h; ++i) {
      StateVector u(6);
      for (auto& x : u) x = rng.uniform();
      ex.context.user_states.push_back(u);
    }
    ex.context.round = static_cast<int>(h) + 1;
    ex.context.num_rounds = 8;
    for (std::size_t i = 0; i < 1 + rng.index(3); ++i) ex.target.push_back(static_cast<Strategy>(rng.index(7)));
  }
  return finite_diff_check(
      model.params(), [&](Tape& t, const ParamStore&) { return model.batch_loss(t, batch); }, eps, tol, 8,
      seed);
}

GradCheckReport check_ufp(std::uint64_t seed, double eps, double tol) {
  Rng rng(seed);
  ufp::NeuralUfpConfig config;
  config.d_emb = 8;
  config.heads = 2;
  config.d_ff = 8;
  config.state_dim = 5;
  config.max_len = 4;
  config.head_sees_query = rng.uniform() < 0.5;
  config.seed = seed;
  ufp::NeuralUfp model(config);
  std::vector<ufp::TrainingExample> batch(2);
  for (auto& ex : batch) {
    for (std::size_t i = 0; i < 1 + rng.index(4); ++i) ex.sequence.push_back(static_cast<Strategy>(rng.index(7)));
    for (std::size_t i = 0; i < rng.index(4); ++i) {
      StateVector u(5);
      for (auto& x : u) x = rng.uniform();
      ex.states.push_back(u);
    }
    ex.score = 1.0 + static_cast<double>(rng.index(5));
  }
  return finite_diff_check(
      model.params(), [&](Tape& t, const ParamStore&) { return model.batch_loss(t, batch); }, eps, tol, 8,
      seed);
}

}  // namespace

std::vector<std::string> grad_case_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : registry()) names.push_back(name);
  names.push_back("ssg_nll");
  names.push_back("ufp_mse");
  return names;
}

GradCheckReport run_grad_case(const std::string& name, std::uint64_t seed, double eps, double tol) {
  if (name == "ssg_nll") return check_ssg(seed, eps, tol);
  if (name == "ufp_mse") return check_ufp(seed, eps, tol);
  Rng rng(seed * 7919 + 17);
  Setup setup;
  registry().at(name)(setup, rng);
  return finite_diff_check(setup.store, setup.loss, eps, tol, 16, seed);
}

}  // namespace multiesc::testing
