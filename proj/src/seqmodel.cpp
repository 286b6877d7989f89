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

#include "multiesc/seqmodel.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "multiesc/error.hpp"

namespace multiesc::ssg {

namespace {

using nlohmann::json;
using nn::Mask;
using nn::Matrix;
using nn::Tape;
using nn::Var;

double safe_log(double p) { return p < 1e-300 ? -1e9 : std::log(p); }

json dist_to_json(const StrategyDist& d) { return json(std::vector<double>(d.begin(), d.end())); }

StrategyDist dist_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != kNumPlanable) throw Error("ssg", "Corrupt", "distribution must have 7 entries");
  StrategyDist d{};
  std::copy(v.begin(), v.end(), d.begin());
  return d;
}

void check_dist(const StrategyDist& d) {
  double total = 0.0;
  for (double p : d) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error("ssg", "BadDistribution", "negative or non-finite probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("ssg", "BadDistribution", "probabilities must sum to 1");
}

std::vector<int> ids_of(std::span<const Strategy> s) {
  std::vector<int> out;
  out.reserve(s.size());
  for (auto x : s) out.push_back(to_id(x));
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

StrategyDist uniform_dist() {
  StrategyDist d;
  d.fill(1.0 / kNumPlanable);
  return d;
}

std::string TrainLog::to_csv(std::string_view loss_name) const {
  std::string out = "epoch," + std::string(loss_name) + "\n";
  for (std::size_t e = 0; e < epoch_loss.size(); ++e) {
    out += std::to_string(e) + "," + format_double(epoch_loss[e]) + "\n";
  }
  return out;
}

StrategyDist SequenceModel::next_dist(const PlanContext& ctx, std::span<const Strategy> prefix) const {
  if (static_cast<int>(prefix.size()) >= max_plan_length()) {
    throw Error("ssg", "PrefixTooLong",
                "prefix of length " + std::to_string(prefix.size()) + " with plan length limit " +
                    std::to_string(max_plan_length()));
  }
  for (auto s : prefix) {
    if (!is_planable(s)) throw Error("ssg", "InvalidStrategy", "Other cannot appear in a plan");
  }
  return compute_next(ctx, prefix);
}

double sequence_logprob(const SequenceModel& model, const PlanContext& ctx, Strategy first,
                        std::span<const Strategy> future) {
  std::vector<Strategy> prefix{first};
  double total = 0.0;
  for (auto s : future) {
    if (!is_planable(s)) throw Error("ssg", "InvalidStrategy", "Other cannot appear in a plan");
    total += safe_log(model.next_dist(ctx, prefix)[static_cast<std::size_t>(to_id(s))]);
    prefix.push_back(s);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Markov

int stage_bucket(int round, int num_rounds) {
  if (num_rounds <= 0 || round <= 0) return 0;
  const int q = (5 * round + num_rounds - 1) / num_rounds;
  return std::clamp(q, 1, 5);
}

int emotion_bucket(const std::vector<StateVector>& states) {
  if (states.empty()) return 0;
  const auto& v = states.back();
  if (v.size() < 4) return 0;
  const double coverage = v[v.size() - 3];
  if (!(coverage > 0.0)) return 0;
  const double valence = v[v.size() - 2];
  return 1 + std::clamp(static_cast<int>(std::floor(valence * 3.0)), 0, 2);
}

MarkovKey MarkovModel::key_for(const PlanContext& ctx, std::span<const Strategy> prefix) const {
  std::vector<int> seq = ctx.history;
  for (auto s : prefix) seq.push_back(to_id(s));
  MarkovKey key;
  const auto order = static_cast<std::size_t>(config_.order);
  key.gram.assign(order, kBosToken);
  const std::size_t take = std::min(order, seq.size());
  std::copy(seq.end() - static_cast<std::ptrdiff_t>(take), seq.end(),
            key.gram.end() - static_cast<std::ptrdiff_t>(take));
  key.stage = config_.use_stage ? stage_bucket(ctx.round, ctx.num_rounds) : 0;
  key.emotion = config_.use_emotion ? emotion_bucket(ctx.user_states) : 0;
  return key;
}

void MarkovModel::observe(const MarkovKey& key, Strategy next) {
  const auto s = static_cast<std::size_t>(to_id(next));
  MarkovKey k = key;
  ++counts_[k][s];
  k.emotion = -1;
  ++counts_[k][s];
  k.stage = -1;
  ++counts_[k][s];
  while (!k.gram.empty()) {
    k.gram.erase(k.gram.begin());
    ++counts_[k][s];
  }
}

StrategyDist MarkovModel::smoothed(MarkovKey key) const {
  auto from_counts = [&](const Counts& c) {
    const double total = static_cast<double>(std::accumulate(c.begin(), c.end(), std::uint64_t{0}));
    StrategyDist d;
    const double denom = total + config_.alpha * kNumPlanable;
    for (std::size_t i = 0; i < kNumPlanable; ++i) {
      d[i] = (static_cast<double>(c[i]) + config_.alpha) / denom;
    }
    return d;
  };
  auto lookup = [&](const MarkovKey& k) -> const Counts* {
    auto it = counts_.find(k);
    if (it == counts_.end()) return nullptr;
    for (auto c : it->second) {
      if (c) return &it->second;
    }
    return nullptr;
  };
  if (const Counts* c = lookup(key)) return from_counts(*c);
  key.emotion = -1;
  if (const Counts* c = lookup(key)) return from_counts(*c);
  key.stage = -1;
  if (const Counts* c = lookup(key)) return from_counts(*c);
  while (!key.gram.empty()) {
    key.gram.erase(key.gram.begin());
    if (const Counts* c = lookup(key)) return from_counts(*c);
  }
  return uniform_dist();
}

StrategyDist MarkovModel::compute_next(const PlanContext& ctx, std::span<const Strategy> prefix) const {
  return smoothed(key_for(ctx, prefix));
}

double MarkovModel::nll(std::span<const TrainingExample> examples) const {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& ex : examples) {
    std::vector<Strategy> prefix;
    for (auto s : ex.target) {
      total -= safe_log(next_dist(ex.context, prefix)[static_cast<std::size_t>(to_id(s))]);
      prefix.push_back(s);
      ++n;
    }
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

json MarkovModel::to_json() const {
  json counts = json::array();
  for (const auto& [key, c] : counts_) {
    const bool full = key.stage >= 0 && key.emotion >= 0 &&
                      key.gram.size() == static_cast<std::size_t>(config_.order);
    if (!full) continue;
    counts.push_back({{"gram", key.gram},
                      {"stage", key.stage},
                      {"emotion", key.emotion},
                      {"counts", std::vector<std::uint64_t>(c.begin(), c.end())}});
  }
  return {{"kind", "markov"},
          {"config",
           {{"order", config_.order},
            {"alpha", config_.alpha},
            {"use_stage", config_.use_stage},
            {"use_emotion", config_.use_emotion},
            {"max_plan_length", config_.max_plan_length}}},
          {"counts", std::move(counts)}};
}

std::unique_ptr<MarkovModel> MarkovModel::from_json(const json& j) {
  const auto& c = j.at("config");
  MarkovConfig config;
  config.order = c.at("order").get<int>();
  config.alpha = c.at("alpha").get<double>();
  config.use_stage = c.at("use_stage").get<bool>();
  config.use_emotion = c.at("use_emotion").get<bool>();
  config.max_plan_length = c.at("max_plan_length").get<int>();
  auto model = std::make_unique<MarkovModel>(config);
  for (const auto& entry : j.at("counts")) {
    MarkovKey key{entry.at("gram").get<std::vector<int>>(), entry.at("stage").get<int>(),
                  entry.at("emotion").get<int>()};
    const auto counts = entry.at("counts").get<std::vector<std::uint64_t>>();
    if (counts.size() != kNumPlanable || key.gram.size() != static_cast<std::size_t>(config.order)) {
      throw Error("ssg", "Corrupt", "malformed count row");
    }
    for (std::size_t s = 0; s < kNumPlanable; ++s) {
      for (std::uint64_t n = 0; n < counts[s]; ++n) model->observe(key, static_cast<Strategy>(s));
    }
  }
  return model;
}

std::unique_ptr<MarkovModel> train_markov(std::span<const TrainingExample> examples,
                                          const MarkovConfig& config) {
  if (config.order < 0) throw Error("ssg", "BadConfig", "order must be >= 0");
  if (!(config.alpha >= 0.0)) throw Error("ssg", "BadConfig", "alpha must be >= 0");
  if (config.max_plan_length < 1) throw Error("ssg", "BadConfig", "max_plan_length must be >= 1");
  if (examples.empty()) throw Error("ssg", "EmptyTraining", "no planning examples");
  auto model = std::make_unique<MarkovModel>(config);
  for (const auto& ex : examples) {
    std::vector<Strategy> prefix;
    for (auto s : ex.target) {
      if (!is_planable(s)) throw Error("ssg", "InvalidStrategy", "Other in a training target");
      model->observe(model->key_for(ex.context, prefix), s);
      prefix.push_back(s);
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Table

TableModel::TableModel(int max_plan_length, StrategyDist fallback)
    : max_plan_length_(max_plan_length), fallback_(fallback) {
  check_dist(fallback_);
}

void TableModel::set(std::vector<Strategy> prefix, const StrategyDist& dist) {
  check_dist(dist);
  table_[ids_of(prefix)] = dist;
}

StrategyDist TableModel::compute_next(const PlanContext&, std::span<const Strategy> prefix) const {
  auto it = table_.find(ids_of(prefix));
  return it == table_.end() ? fallback_ : it->second;
}

json TableModel::to_json() const {
  json rows = json::array();
  for (const auto& [prefix, dist] : table_) {
    rows.push_back({{"prefix", prefix}, {"probs", dist_to_json(dist)}});
  }
  return {{"kind", "table"},
          {"max_plan_length", max_plan_length_},
          {"fallback", dist_to_json(fallback_)},
          {"rows", std::move(rows)}};
}

std::unique_ptr<TableModel> TableModel::from_json(const json& j) {
  auto model = std::make_unique<TableModel>(j.at("max_plan_length").get<int>(),
                                            dist_from_json(j.at("fallback")));
  for (const auto& row : j.at("rows")) {
    std::vector<Strategy> prefix;
    for (const auto& s : row.at("prefix")) {
      if (s.is_string()) {
        auto named = strategy_from_name(s.get<std::string>());
        if (!named) throw Error("ssg", "Corrupt", "unknown strategy " + s.dump());
        prefix.push_back(*named);
      } else {
        prefix.push_back(strategy_from_id(s.get<int>()));
      }
    }
    model->set(std::move(prefix), dist_from_json(row.at("probs")));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Neural

namespace {

constexpr std::size_t kStrategyRows = kNumStrategies + 1;  // planable, Other, BOS
constexpr std::size_t kHistoryPositions = 16;

std::string layer_prefix(int l) { return "ssg.layer" + std::to_string(l); }

void validate(const NeuralSsgConfig& c) {
  if (c.d_emb == 0 || c.heads < 1 || c.d_emb % static_cast<std::size_t>(c.heads) != 0) {
    throw Error("ssg", "BadConfig", "d_emb must be a positive multiple of heads");
  }
  if (c.layers < 1 || c.max_plan_length < 1 || c.vocab_buckets == 0 || c.num_emotions == 0 ||
      c.state_dim == 0 || c.batch_size == 0 || c.d_ff == 0) {
    throw Error("ssg", "BadConfig", "neural SSG sizes must be positive");
  }
}

}  // namespace

NeuralSsg::NeuralSsg(NeuralSsgConfig config)
    : config_(config), params_(std::make_unique<nn::ParamStore>()) {
  validate(config_);
  Rng rng(config_.seed);
  auto& s = *params_;
  const std::size_t d = config_.d_emb;
  s.add_uniform("ssg.strategy_embedding", kStrategyRows, d, 1.0, rng);
  s.add_uniform("ssg.position_embedding", static_cast<std::size_t>(config_.max_plan_length), d, 1.0, rng);
  s.add_uniform("ssg.history_position", kHistoryPositions, d, 1.0, rng);
  s.add_uniform("ssg.token_embedding", config_.vocab_buckets, d, 1.0, rng);
  s.add_uniform("ssg.emotion_embedding", config_.num_emotions, d, 1.0, rng);
  s.add_uniform("ssg.empty_history", 1, d, 1.0, rng);
  nn::Linear::create(s, "ssg.state_projection", config_.state_dim, d, rng);
  for (int l = 0; l < config_.layers; ++l) {
    const auto p = layer_prefix(l);
    nn::MultiHeadAttention::create(s, p + ".self_attn", d, config_.heads, rng);
    s.add(p + ".self_ln_gain", Matrix(1, d, 1.0));
    s.add(p + ".self_ln_bias", Matrix(1, d, 0.0));
    nn::MultiHeadAttention::create(s, p + ".history_attn", d, config_.heads, rng);
    nn::MultiHeadAttention::create(s, p + ".state_attn", d, config_.heads, rng);
    nn::GateFusion::create(s, p + ".fusion", d, rng);
    s.add(p + ".fuse_ln_gain", Matrix(1, d, 1.0));
    s.add(p + ".fuse_ln_bias", Matrix(1, d, 0.0));
    nn::FeedForwardBlock::create(s, p + ".ffn", d, config_.d_ff, rng);
  }
  nn::Linear::create(s, "ssg.output", d, kNumPlanable, rng);
  bind();
}

NeuralSsg::NeuralSsg(NeuralSsgConfig config, nn::ParamStore params)
    : config_(config), params_(std::make_unique<nn::ParamStore>(std::move(params))) {
  validate(config_);
  bind();
}

void NeuralSsg::bind() {
  layers_.clear();
  const auto& s = *params_;
  for (int l = 0; l < config_.layers; ++l) {
    const auto p = layer_prefix(l);
    layers_.push_back(Layer{nn::MultiHeadAttention::bind(s, p + ".self_attn", config_.heads),
                            &s.get(p + ".self_ln_gain"), &s.get(p + ".self_ln_bias"),
                            nn::MultiHeadAttention::bind(s, p + ".history_attn", config_.heads),
                            nn::MultiHeadAttention::bind(s, p + ".state_attn", config_.heads),
                            nn::GateFusion::bind(s, p + ".fusion"), &s.get(p + ".fuse_ln_gain"),
                            &s.get(p + ".fuse_ln_bias"),
                            nn::FeedForwardBlock::bind(s, p + ".ffn")});
  }
  // Shape check against the config, so a mismatched checkpoint fails early.
  if (s.get("ssg.strategy_embedding").value.cols() != config_.d_emb ||
      s.get("ssg.token_embedding").value.rows() != config_.vocab_buckets ||
      s.get("ssg.state_projection.weight").value.rows() != config_.state_dim) {
    throw Error("ssg", "Corrupt", "checkpoint shapes disagree with the config");
  }
}

Var NeuralSsg::logits(Tape& tape, const PlanContext& ctx, std::span<const Strategy> inputs) const {
  const auto& s = *params_;
  const std::size_t n = inputs.size() + 1;
  if (n > static_cast<std::size_t>(config_.max_plan_length)) {
    throw Error("ssg", "PrefixTooLong", "input longer than the positional table");
  }
  const Var strategy_table = tape.param(s.get("ssg.strategy_embedding"));

  std::vector<int> ids{kBosToken};
  for (auto x : inputs) ids.push_back(to_id(x));
  Var x = add(embedding(strategy_table, ids),
              slice_rows(tape.param(s.get("ssg.position_embedding")), 0, n));

  // Dialogue-history memory: window tokens (token + emotion embedding) and
  // the most recent strategy labels (strategy + recency embedding).
  std::vector<Var> memory_parts;
  const std::size_t w = std::min(config_.window, ctx.window.size());
  if (w > 0) {
    std::vector<int> tok_ids, emo_ids;
    for (std::size_t i = ctx.window.size() - w; i < ctx.window.size(); ++i) {
      tok_ids.push_back(static_cast<int>(fnv1a64(ctx.window[i]) % config_.vocab_buckets));
      int emo = i < ctx.window_emotions.size() ? ctx.window_emotions[i]
                                               : static_cast<int>(config_.num_emotions) - 1;
      emo_ids.push_back(std::clamp(emo, 0, static_cast<int>(config_.num_emotions) - 1));
    }
    memory_parts.push_back(add(embedding(tape.param(s.get("ssg.token_embedding")), tok_ids),
                               embedding(tape.param(s.get("ssg.emotion_embedding")), emo_ids)));
  }
  const std::size_t h = std::min(kHistoryPositions, ctx.history.size());
  if (h > 0) {
    std::vector<int> hist_ids, pos_ids;
    for (std::size_t i = ctx.history.size() - h; i < ctx.history.size(); ++i) {
      hist_ids.push_back(std::clamp(ctx.history[i], 0, kNumStrategies - 1));
      pos_ids.push_back(static_cast<int>(ctx.history.size() - 1 - i));
    }
    memory_parts.push_back(add(embedding(strategy_table, hist_ids),
                               embedding(tape.param(s.get("ssg.history_position")), pos_ids)));
  }
  if (memory_parts.empty()) memory_parts.push_back(tape.param(s.get("ssg.empty_history")));
  const Var history = memory_parts.size() == 1 ? memory_parts[0] : concat_rows(memory_parts);

  Matrix states_m(std::max<std::size_t>(ctx.user_states.size(), 1), config_.state_dim);
  for (std::size_t r = 0; r < ctx.user_states.size(); ++r) {
    const auto& u = ctx.user_states[r];
    if (u.size() != config_.state_dim) {
      throw Error("ssg", "StateDimMismatch",
                  "user state has " + std::to_string(u.size()) + " entries, model expects " +
                      std::to_string(config_.state_dim));
    }
    std::copy(u.begin(), u.end(), states_m.row(r).begin());
  }
  const Var states =
      nn::Linear::bind(s, "ssg.state_projection").forward(tape, tape.constant(std::move(states_m)));

  for (const auto& layer : layers_) {
    x = layer_norm(add(x, masked_self_attention(tape, layer.self_attn, x)),
                   tape.param(*layer.self_ln_gain), tape.param(*layer.self_ln_bias));
    const Var from_history = layer.history_attn.forward(tape, x, history, history);
    const Var from_states = layer.state_attn.forward(tape, x, states, states);
    x = layer_norm(add(x, layer.fusion.forward(tape, from_history, from_states)),
                   tape.param(*layer.fuse_ln_gain), tape.param(*layer.fuse_ln_bias));
    x = layer.ffn.forward(tape, x);
  }
  return nn::Linear::bind(s, "ssg.output").forward(tape, x);
}

StrategyDist NeuralSsg::compute_next(const PlanContext& ctx, std::span<const Strategy> prefix) const {
  Tape tape;
  const Var out = logits(tape, ctx, prefix);
  const Var probs = softmax_rows(slice_rows(out, out.rows() - 1, 1));
  StrategyDist d;
  for (std::size_t i = 0; i < kNumPlanable; ++i) d[i] = probs.value()[i];
  return d;
}

Var NeuralSsg::loss(Tape& tape, const TrainingExample& example) const {
  if (example.target.empty()) throw Error("ssg", "EmptyTarget", "training example without target");
  const std::span<const Strategy> inputs(example.target.data(), example.target.size() - 1);
  return cross_entropy(logits(tape, example.context, inputs), ids_of(example.target));
}

Var NeuralSsg::batch_loss(Tape& tape, std::span<const TrainingExample> batch) const {
  if (batch.empty()) throw Error("ssg", "EmptyTraining", "empty batch");
  Var total;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Var l = loss(tape, batch[i]);
    total = i == 0 ? l : add(total, l);
  }
  return scale(total, 1.0 / static_cast<double>(batch.size()));
}

json NeuralSsg::to_json() const {
  return {{"kind", "neural"},
          {"config",
           {{"d_emb", config_.d_emb},
            {"heads", config_.heads},
            {"layers", config_.layers},
            {"d_ff", config_.d_ff},
            {"vocab_buckets", config_.vocab_buckets},
            {"num_emotions", config_.num_emotions},
            {"state_dim", config_.state_dim},
            {"window", config_.window},
            {"max_plan_length", config_.max_plan_length},
            {"lr", config_.lr},
            {"weight_decay", config_.weight_decay},
            {"batch_size", config_.batch_size},
            {"seed", config_.seed}}},
          {"params", nn::params_to_json(*params_)}};
}

std::unique_ptr<NeuralSsg> NeuralSsg::from_json(const json& j) {
  const auto& c = j.at("config");
  NeuralSsgConfig config;
  config.d_emb = c.at("d_emb").get<std::size_t>();
  config.heads = c.at("heads").get<int>();
  config.layers = c.at("layers").get<int>();
  config.d_ff = c.at("d_ff").get<std::size_t>();
  config.vocab_buckets = c.at("vocab_buckets").get<std::size_t>();
  config.num_emotions = c.at("num_emotions").get<std::size_t>();
  config.state_dim = c.at("state_dim").get<std::size_t>();
  config.window = c.at("window").get<std::size_t>();
  config.max_plan_length = c.at("max_plan_length").get<int>();
  config.lr = c.at("lr").get<double>();
  config.weight_decay = c.at("weight_decay").get<double>();
  config.batch_size = c.at("batch_size").get<std::size_t>();
  config.seed = c.at("seed").get<std::uint64_t>();
  try {
    return std::make_unique<NeuralSsg>(config, nn::params_from_json(j.at("params")));
  } catch (const Error& e) {
    if (e.module() == "nn" && e.code() == "VersionMismatch") {
      throw Error("ssg", "VersionMismatch", e.what());
    }
    if (e.module() == "nn") throw Error("ssg", "Corrupt", e.what());
    throw;
  }
}

std::unique_ptr<NeuralSsg> train_neural_ssg(std::span<const TrainingExample> examples,
                                            const NeuralSsgConfig& config, int epochs,
                                            TrainLog* log) {
  if (examples.empty()) throw Error("ssg", "EmptyTraining", "no planning examples");
  if (epochs < 0) throw Error("ssg", "BadConfig", "epochs must be >= 0");
  auto model = std::make_unique<NeuralSsg>(config);
  auto& store = model->params();
  const nn::AdamW opt{config.lr, 0.9, 0.999, 1e-8, config.weight_decay};
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  auto full_loss = [&] {
    double total = 0.0;
    for (const auto& ex : examples) {
      Tape tape;
      total += model->loss(tape, ex).scalar();
    }
    return total / static_cast<double>(examples.size());
  };
  if (log) log->epoch_loss.push_back(full_loss());

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<TrainingExample> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(examples[order[i]]);
      store.zero_grad();
      Tape tape;
      const Var l = model->batch_loss(tape, batch);
      if (!std::isfinite(l.scalar())) {
        throw Error("ssg", "DivergedLoss", "non-finite loss at epoch " + std::to_string(epoch));
      }
      epoch_total += l.scalar() * static_cast<double>(batch.size());
      tape.backward(l, store);
      opt.step(store);
    }
    if (log) log->epoch_loss.push_back(epoch_total / static_cast<double>(examples.size()));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string save(const SequenceModel& model) {
  json j = model.to_json();
  j["format"] = "multiesc-ssg";
  j["version"] = kModelVersion;
  return j.dump();
}

std::unique_ptr<SequenceModel> load(std::string_view bytes) {
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw Error("ssg", "Corrupt", std::string("unreadable checkpoint: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != "multiesc-ssg") {
      throw Error("ssg", "Corrupt", "not an SSG checkpoint");
    }
    if (j.at("version").get<int>() != kModelVersion) {
      throw Error("ssg", "VersionMismatch",
                  "checkpoint version " + j.at("version").dump() + ", expected " +
                      std::to_string(kModelVersion));
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "markov") return MarkovModel::from_json(j);
    if (kind == "table") return TableModel::from_json(j);
    if (kind == "neural") return NeuralSsg::from_json(j);
    throw Error("ssg", "Corrupt", "unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error("ssg", "Corrupt", e.what());
  }
}

}  // namespace multiesc::ssg
