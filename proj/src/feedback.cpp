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

#include "multiesc/feedback.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "multiesc/error.hpp"

namespace multiesc::ufp {

namespace {

using nlohmann::json;
using nn::Matrix;
using nn::Tape;
using nn::Var;

void check_sequence(std::span<const Strategy> sequence, int max_len) {
  if (sequence.empty()) throw Error("ufp", "EmptySequence", "strategy sequence is empty");
  if (static_cast<int>(sequence.size()) > max_len) {
    throw Error("ufp", "SequenceTooLong",
                "sequence of length " + std::to_string(sequence.size()) + " exceeds " +
                    std::to_string(max_len));
  }
  for (auto s : sequence) {
    if (!is_planable(s)) throw Error("ufp", "InvalidStrategy", "Other cannot be scored");
  }
}

std::vector<int> ids_of(std::span<const Strategy> s) {
  std::vector<int> out;
  for (auto x : s) out.push_back(to_id(x));
  return out;
}

std::vector<Strategy> strategies_from_json(const json& j) {
  std::vector<Strategy> out;
  for (const auto& s : j) {
    if (s.is_string()) {
      auto named = strategy_from_name(s.get<std::string>());
      if (!named) throw Error("ufp", "Corrupt", "unknown strategy " + s.dump());
      out.push_back(*named);
    } else {
      out.push_back(strategy_from_id(s.get<int>()));
    }
  }
  return out;
}

}  // namespace

double FeedbackModel::raw(std::span<const Strategy> sequence,
                          const std::vector<StateVector>& states) const {
  check_sequence(sequence, max_len());
  return compute(sequence, states);
}

double FeedbackModel::predict(std::span<const Strategy> sequence,
                              const std::vector<StateVector>& states) const {
  return std::clamp(raw(sequence, states), kMinScore, kMaxScore);
}

// ---------------------------------------------------------------------------
// Linear

std::vector<double> featurize_sequence(std::span<const Strategy> sequence,
                                       const std::vector<StateVector>& states,
                                       std::size_t state_dim) {
  if (sequence.empty()) throw Error("ufp", "EmptySequence", "strategy sequence is empty");
  std::vector<double> phi(feature_dim(state_dim), 0.0);
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const auto a = static_cast<std::size_t>(to_id(sequence[i]));
    if (a >= kNumPlanable) throw Error("ufp", "InvalidStrategy", "Other cannot be scored");
    phi[a] = 1.0;
    if (i > 0) {
      const auto prev = static_cast<std::size_t>(to_id(sequence[i - 1]));
      phi[kNumUnigrams + prev * kNumPlanable + a] = 1.0;
    }
  }
  phi[kNumUnigrams + kNumBigrams] = static_cast<double>(sequence.size());
  if (!states.empty()) {
    const auto& u = states.back();
    if (u.size() != state_dim) {
      throw Error("ufp", "StateDimMismatch",
                  "user state has " + std::to_string(u.size()) + " entries, expected " +
                      std::to_string(state_dim));
    }
    std::copy(u.begin(), u.end(), phi.begin() + static_cast<std::ptrdiff_t>(kNumUnigrams + kNumBigrams + 1));
  }
  return phi;
}

LinearUfp::LinearUfp(std::size_t state_dim, int max_len, std::vector<double> weights, double bias)
    : state_dim_(state_dim), max_len_(max_len), weights_(std::move(weights)), bias_(bias) {
  if (weights_.size() != feature_dim(state_dim_)) {
    throw Error("ufp", "BadConfig", "weight vector does not match the feature dimension");
  }
  if (max_len_ < 1) throw Error("ufp", "BadConfig", "max_len must be >= 1");
}

double LinearUfp::compute(std::span<const Strategy> sequence,
                          const std::vector<StateVector>& states) const {
  const auto phi = featurize_sequence(sequence, states, state_dim_);
  return std::inner_product(phi.begin(), phi.end(), weights_.begin(), bias_);
}

json LinearUfp::to_json() const {
  return {{"kind", "linear"},
          {"state_dim", state_dim_},
          {"max_len", max_len_},
          {"weights", weights_},
          {"bias", bias_}};
}

std::unique_ptr<LinearUfp> LinearUfp::from_json(const json& j) {
  return std::make_unique<LinearUfp>(j.at("state_dim").get<std::size_t>(), j.at("max_len").get<int>(),
                                     j.at("weights").get<std::vector<double>>(),
                                     j.at("bias").get<double>());
}

std::unique_ptr<LinearUfp> train_linear(std::span<const TrainingExample> examples, double ridge,
                                        int max_len) {
  if (examples.empty()) throw Error("ufp", "EmptyTraining", "no feedback examples");
  if (!(ridge >= 0.0)) throw Error("ufp", "BadConfig", "ridge must be >= 0");
  std::size_t state_dim = 0;
  for (const auto& ex : examples) {
    if (!ex.states.empty()) {
      state_dim = ex.states.back().size();
      break;
    }
  }
  const std::size_t p = feature_dim(state_dim);
  const auto n = static_cast<Eigen::Index>(examples.size());
  const auto cols = static_cast<Eigen::Index>(p + 1);

  // Least squares on [Phi 1; sqrt(ridge) D] against [y; 0], which has the
  // ridge normal equations as its own.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + cols - 1, cols);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + cols - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& ex = examples[static_cast<std::size_t>(i)];
    const auto phi = featurize_sequence(ex.sequence, ex.states, state_dim);
    for (std::size_t c = 0; c < p; ++c) a(i, static_cast<Eigen::Index>(c)) = phi[c];
    a(i, cols - 1) = 1.0;
    b(i) = ex.score;
  }
  const double root = std::sqrt(ridge);
  for (Eigen::Index c = 0; c + 1 < cols; ++c) a(n + c, c) = root;
  const Eigen::VectorXd theta = a.colPivHouseholderQr().solve(b);

  std::vector<double> weights(p);
  for (std::size_t c = 0; c < p; ++c) weights[c] = theta(static_cast<Eigen::Index>(c));
  return std::make_unique<LinearUfp>(state_dim, max_len, std::move(weights), theta(cols - 1));
}

// ---------------------------------------------------------------------------
// Table

void TableUfp::set(std::vector<Strategy> sequence, double score) {
  check_sequence(sequence, max_len_);
  table_[ids_of(sequence)] = score;
}

double TableUfp::compute(std::span<const Strategy> sequence, const std::vector<StateVector>&) const {
  auto it = table_.find(ids_of(sequence));
  return it == table_.end() ? fallback_ : it->second;
}

json TableUfp::to_json() const {
  json rows = json::array();
  for (const auto& [seq, score] : table_) rows.push_back({{"sequence", seq}, {"score", score}});
  return {{"kind", "table"}, {"max_len", max_len_}, {"fallback", fallback_}, {"rows", std::move(rows)}};
}

std::unique_ptr<TableUfp> TableUfp::from_json(const json& j) {
  auto model = std::make_unique<TableUfp>(j.at("max_len").get<int>(), j.at("fallback").get<double>());
  for (const auto& row : j.at("rows")) {
    model->set(strategies_from_json(row.at("sequence")), row.at("score").get<double>());
  }
  return model;
}

// ---------------------------------------------------------------------------
// Neural

namespace {

constexpr int kClsToken = kNumPlanable;

void validate(const NeuralUfpConfig& c) {
  if (c.d_emb == 0 || c.heads < 1 || c.d_emb % static_cast<std::size_t>(c.heads) != 0) {
    throw Error("ufp", "BadConfig", "d_emb must be a positive multiple of heads");
  }
  if (c.d_ff == 0 || c.state_dim == 0 || c.max_len < 1 || c.batch_size == 0) {
    throw Error("ufp", "BadConfig", "neural UFP sizes must be positive");
  }
}

}  // namespace

NeuralUfp::NeuralUfp(NeuralUfpConfig config)
    : config_(config), params_(std::make_unique<nn::ParamStore>()) {
  validate(config_);
  Rng rng(config_.seed);
  auto& s = *params_;
  const std::size_t d = config_.d_emb;
  s.add_uniform("ufp.strategy_embedding", kNumPlanable + 1, d, 1.0, rng);
  s.add_uniform("ufp.position_embedding", static_cast<std::size_t>(config_.max_len) + 1, d, 1.0, rng);
  nn::MultiHeadAttention::create(s, "ufp.encoder_attn", d, config_.heads, rng);
  s.add("ufp.encoder_ln_gain", Matrix(1, d, 1.0));
  s.add("ufp.encoder_ln_bias", Matrix(1, d, 0.0));
  nn::FeedForwardBlock::create(s, "ufp.encoder_ffn", d, config_.d_ff, rng);
  nn::Lstm::create(s, "ufp.lstm", config_.state_dim, d, rng);
  s.add_uniform("ufp.attention_weight", d, d, rng);
  nn::Linear::create(s, "ufp.head", config_.head_sees_query ? 2 * d : d, 1, rng);
  bind();
}

NeuralUfp::NeuralUfp(NeuralUfpConfig config, nn::ParamStore params)
    : config_(config), params_(std::make_unique<nn::ParamStore>(std::move(params))) {
  validate(config_);
  bind();
}

void NeuralUfp::bind() {
  const auto& s = *params_;
  encoder_attn_ = nn::MultiHeadAttention::bind(s, "ufp.encoder_attn", config_.heads);
  encoder_ffn_ = nn::FeedForwardBlock::bind(s, "ufp.encoder_ffn");
  lstm_ = nn::Lstm::bind(s, "ufp.lstm");
  head_ = nn::Linear::bind(s, "ufp.head");
  const std::size_t d = config_.d_emb;
  if (s.get("ufp.strategy_embedding").value.cols() != d ||
      s.get("ufp.lstm.input_weight").value.rows() != config_.state_dim ||
      head_.weight->value.rows() != (config_.head_sees_query ? 2 * d : d)) {
    throw Error("ufp", "Corrupt", "checkpoint shapes disagree with the config");
  }
}

Var NeuralUfp::forward(Tape& tape, std::span<const Strategy> sequence,
                       const std::vector<StateVector>& states, std::size_t pad_to) const {
  check_sequence(sequence, config_.max_len);
  const auto& s = *params_;
  std::vector<int> ids{kClsToken};
  for (auto x : sequence) ids.push_back(to_id(x));
  Var x = add(embedding(tape.param(s.get("ufp.strategy_embedding")), ids),
              slice_rows(tape.param(s.get("ufp.position_embedding")), 0, ids.size()));
  x = layer_norm(add(x, encoder_attn_.forward(tape, x, x, x)), tape.param(s.get("ufp.encoder_ln_gain")),
                 tape.param(s.get("ufp.encoder_ln_bias")));
  x = encoder_ffn_.forward(tape, x);
  const Var query = slice_rows(x, 0, 1);

  // A dialogue without states attends over a single zero placeholder row.
  const std::size_t valid = std::max<std::size_t>(states.size(), 1);
  const std::size_t rows = std::max(valid, pad_to);
  Matrix memory(rows, config_.state_dim);
  for (std::size_t r = 0; r < states.size(); ++r) {
    if (states[r].size() != config_.state_dim) {
      throw Error("ufp", "StateDimMismatch",
                  "user state has " + std::to_string(states[r].size()) + " entries, expected " +
                      std::to_string(config_.state_dim));
    }
    std::copy(states[r].begin(), states[r].end(), memory.row(r).begin());
  }
  const Var hidden = lstm_.forward(tape, tape.constant(std::move(memory)));
  const auto attended =
      nn::luong_attention(query, hidden, tape.param(s.get("ufp.attention_weight")), valid);
  const Var features = config_.head_sees_query ? concat_cols(attended.context, query) : attended.context;
  return head_.forward(tape, features);
}

double NeuralUfp::compute(std::span<const Strategy> sequence,
                          const std::vector<StateVector>& states) const {
  Tape tape;
  return forward(tape, sequence, states).scalar();
}

Var NeuralUfp::batch_loss(Tape& tape, std::span<const TrainingExample> batch) const {
  if (batch.empty()) throw Error("ufp", "EmptyTraining", "empty batch");
  Var total;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Var l = mse(forward(tape, batch[i].sequence, batch[i].states), Matrix(1, 1, batch[i].score));
    total = i == 0 ? l : add(total, l);
  }
  return scale(total, 1.0 / static_cast<double>(batch.size()));
}

json NeuralUfp::to_json() const {
  return {{"kind", "neural"},
          {"config",
           {{"d_emb", config_.d_emb},
            {"heads", config_.heads},
            {"d_ff", config_.d_ff},
            {"state_dim", config_.state_dim},
            {"max_len", config_.max_len},
            {"head_sees_query", config_.head_sees_query},
            {"lr", config_.lr},
            {"weight_decay", config_.weight_decay},
            {"batch_size", config_.batch_size},
            {"seed", config_.seed}}},
          {"params", nn::params_to_json(*params_)}};
}

std::unique_ptr<NeuralUfp> NeuralUfp::from_json(const json& j) {
  const auto& c = j.at("config");
  NeuralUfpConfig config;
  config.d_emb = c.at("d_emb").get<std::size_t>();
  config.heads = c.at("heads").get<int>();
  config.d_ff = c.at("d_ff").get<std::size_t>();
  config.state_dim = c.at("state_dim").get<std::size_t>();
  config.max_len = c.at("max_len").get<int>();
  config.head_sees_query = c.at("head_sees_query").get<bool>();
  config.lr = c.at("lr").get<double>();
  config.weight_decay = c.at("weight_decay").get<double>();
  config.batch_size = c.at("batch_size").get<std::size_t>();
  config.seed = c.at("seed").get<std::uint64_t>();
  try {
    return std::make_unique<NeuralUfp>(config, nn::params_from_json(j.at("params")));
  } catch (const Error& e) {
    if (e.module() == "nn" && e.code() == "VersionMismatch") {
      throw Error("ufp", "VersionMismatch", e.what());
    }
    if (e.module() == "nn") throw Error("ufp", "Corrupt", e.what());
    throw;
  }
}

std::unique_ptr<NeuralUfp> train_neural(std::span<const TrainingExample> examples,
                                        const NeuralUfpConfig& config, int epochs,
                                        ssg::TrainLog* log) {
  if (examples.empty()) throw Error("ufp", "EmptyTraining", "no feedback examples");
  if (epochs < 0) throw Error("ufp", "BadConfig", "epochs must be >= 0");
  auto model = std::make_unique<NeuralUfp>(config);
  auto& store = model->params();
  const nn::AdamW opt{config.lr, 0.9, 0.999, 1e-8, config.weight_decay};
  Rng rng(config.seed ^ 0x5851f42d4c957f2dULL);

  if (log) {
    Tape tape;
    log->epoch_loss.push_back(model->batch_loss(tape, examples).scalar());
  }
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
        throw Error("ufp", "DivergedLoss", "non-finite loss at epoch " + std::to_string(epoch));
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

std::vector<TrainingExample> augment(std::vector<TrainingExample> examples, std::size_t count,
                                     int max_len, std::uint64_t seed) {
  if (count == 0) return examples;
  if (max_len < 1) throw Error("ufp", "BadConfig", "max_len must be >= 1");
  std::vector<std::size_t> real;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (!examples[i].is_augmented) real.push_back(i);
  }
  Rng rng(seed);
  examples.reserve(examples.size() + count);
  for (std::size_t n = 0; n < count; ++n) {
    TrainingExample ex;
    const auto len = 1 + rng.index(static_cast<std::size_t>(max_len));
    for (std::size_t i = 0; i < len; ++i) {
      ex.sequence.push_back(static_cast<Strategy>(rng.index(kNumPlanable)));
    }
    if (!real.empty()) {
      const auto& donor = examples[real[rng.index(real.size())]].states;
      const auto keep = rng.index(donor.size() + 1);
      ex.states.assign(donor.begin(), donor.begin() + static_cast<std::ptrdiff_t>(keep));
    }
    ex.score = kMinScore;
    ex.is_augmented = true;
    examples.push_back(std::move(ex));
  }
  return examples;
}

std::string save(const FeedbackModel& model) {
  json j = model.to_json();
  j["format"] = "multiesc-ufp";
  j["version"] = nn::kCheckpointVersion;
  return j.dump();
}

std::unique_ptr<FeedbackModel> load(std::string_view bytes) {
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw Error("ufp", "Corrupt", std::string("unreadable checkpoint: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != "multiesc-ufp") {
      throw Error("ufp", "Corrupt", "not a UFP checkpoint");
    }
    if (j.at("version").get<int>() != nn::kCheckpointVersion) {
      throw Error("ufp", "VersionMismatch",
                  "checkpoint version " + j.at("version").dump() + ", expected " +
                      std::to_string(nn::kCheckpointVersion));
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "linear") return LinearUfp::from_json(j);
    if (kind == "table") return TableUfp::from_json(j);
    if (kind == "neural") return NeuralUfp::from_json(j);
    throw Error("ufp", "Corrupt", "unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error("ufp", "Corrupt", e.what());
  }
}

}  // namespace multiesc::ufp
