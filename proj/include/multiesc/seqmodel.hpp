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

#include <array>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "multiesc/context.hpp"
#include "multiesc/neuralcore.hpp"

namespace multiesc::ssg {

// Distribution over the 7 planable strategies.
using StrategyDist = std::array<double, kNumPlanable>;

struct TrainingExample {
  PlanContext context;
  std::vector<Strategy> target;  // s_t .. s_{t+L-1}, planable only
};

struct TrainLog {
  // Row 0 is the loss before the first update.
  std::vector<double> epoch_loss;
  std::string to_csv(std::string_view loss_name) const;
};

// Pr(s_{t+l} | s_{t:t+l}, H_t, U_t).
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;

  virtual std::string kind() const = 0;
  // Longest plan the model can score; prefixes must be strictly shorter.
  virtual int max_plan_length() const = 0;
  virtual nlohmann::json to_json() const = 0;

  // Errors: ssg.PrefixTooLong, ssg.InvalidStrategy (Other in the prefix).
  StrategyDist next_dist(const PlanContext& ctx, std::span<const Strategy> prefix) const;

 protected:
  virtual StrategyDist compute_next(const PlanContext& ctx,
                                    std::span<const Strategy> prefix) const = 0;
};

// Chain-rule log-probability of `future` after the candidate s_t.
double sequence_logprob(const SequenceModel& model, const PlanContext& ctx, Strategy first,
                        std::span<const Strategy> future);

// ---------------------------------------------------------------------------
// Smoothed Markov reference backend.

struct MarkovConfig {
  int order = 1;
  double alpha = 0.1;
  bool use_stage = true;
  bool use_emotion = true;
  int max_plan_length = 8;
};

// Conditioning bucket: last `order` tokens of history ⊕ prefix (BOS-padded),
// dialogue-stage quintile, coarse valence bin of the latest user state.
struct MarkovKey {
  std::vector<int> gram;
  int stage = 0;
  int emotion = 0;
  auto operator<=>(const MarkovKey&) const = default;
};

inline constexpr int kBosToken = kNumStrategies;  // 8

int stage_bucket(int round, int num_rounds);
int emotion_bucket(const std::vector<StateVector>& states);

class MarkovModel final : public SequenceModel {
 public:
  using Counts = std::array<std::uint64_t, kNumPlanable>;

  explicit MarkovModel(MarkovConfig config) : config_(config) {}

  std::string kind() const override { return "markov"; }
  int max_plan_length() const override { return config_.max_plan_length; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<MarkovModel> from_json(const nlohmann::json& j);

  const MarkovConfig& config() const { return config_; }
  MarkovKey key_for(const PlanContext& ctx, std::span<const Strategy> prefix) const;
  void observe(const MarkovKey& key, Strategy next);
  const std::map<MarkovKey, Counts>& counts() const { return counts_; }

  // Mean per-target NLL of the examples under the model.
  double nll(std::span<const TrainingExample> examples) const;

 protected:
  StrategyDist compute_next(const PlanContext& ctx,
                            std::span<const Strategy> prefix) const override;

 private:
  // Add-alpha on the first key with observations, backing off by dropping
  // emotion, then stage, then the oldest gram token; uniform when nothing
  // was observed at all.
  StrategyDist smoothed(MarkovKey key) const;

  MarkovConfig config_;
  std::map<MarkovKey, Counts> counts_;
};

// Every target position of every example contributes one count.
// Errors: ssg.EmptyTraining, ssg.BadConfig.
std::unique_ptr<MarkovModel> train_markov(std::span<const TrainingExample> examples,
                                          const MarkovConfig& config);

// ---------------------------------------------------------------------------
// Explicit prefix table: each full prefix (candidate first) maps to a
// distribution; unlisted prefixes fall back to `fallback`. Ignores context.

class TableModel final : public SequenceModel {
 public:
  TableModel(int max_plan_length, StrategyDist fallback);

  void set(std::vector<Strategy> prefix, const StrategyDist& dist);

  std::string kind() const override { return "table"; }
  int max_plan_length() const override { return max_plan_length_; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<TableModel> from_json(const nlohmann::json& j);

 protected:
  StrategyDist compute_next(const PlanContext& ctx,
                            std::span<const Strategy> prefix) const override;

 private:
  int max_plan_length_;
  StrategyDist fallback_;
  std::map<std::vector<int>, StrategyDist> table_;
};

StrategyDist uniform_dist();

// ---------------------------------------------------------------------------
// Neural backend: strategy embeddings -> [masked self-attention, cross
// attention over dialogue features and user states, gate fusion, FFN] x
// layers -> softmax(W_s P + b_s).

struct NeuralSsgConfig {
  std::size_t d_emb = 64;
  int heads = 4;
  int layers = 2;
  std::size_t d_ff = 128;
  std::size_t vocab_buckets = 1024;
  std::size_t num_emotions = 65;
  std::size_t state_dim = 69;
  std::size_t window = 64;
  int max_plan_length = 8;
  double lr = 1e-3;
  double weight_decay = 0.01;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
};

class NeuralSsg final : public SequenceModel {
 public:
  // Freshly initialized parameters.
  explicit NeuralSsg(NeuralSsgConfig config);
  NeuralSsg(NeuralSsgConfig config, nn::ParamStore params);

  std::string kind() const override { return "neural"; }
  int max_plan_length() const override { return config_.max_plan_length; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<NeuralSsg> from_json(const nlohmann::json& j);

  const NeuralSsgConfig& config() const { return config_; }
  nn::ParamStore& params() { return *params_; }
  const nn::ParamStore& params() const { return *params_; }

  // Logits for every position of [BOS] ⊕ inputs.
  nn::Var logits(nn::Tape& tape, const PlanContext& ctx, std::span<const Strategy> inputs) const;
  // Mean NLL of the target sequence (teacher forcing).
  nn::Var loss(nn::Tape& tape, const TrainingExample& example) const;
  nn::Var batch_loss(nn::Tape& tape, std::span<const TrainingExample> batch) const;

 protected:
  StrategyDist compute_next(const PlanContext& ctx,
                            std::span<const Strategy> prefix) const override;

 private:
  struct Layer {
    nn::MultiHeadAttention self_attn;
    const nn::Parameter* self_ln_gain;
    const nn::Parameter* self_ln_bias;
    nn::MultiHeadAttention history_attn;
    nn::MultiHeadAttention state_attn;
    nn::GateFusion fusion;
    const nn::Parameter* fuse_ln_gain;
    const nn::Parameter* fuse_ln_bias;
    nn::FeedForwardBlock ffn;
  };
  void bind();

  NeuralSsgConfig config_;
  std::unique_ptr<nn::ParamStore> params_;
  std::vector<Layer> layers_;
};

// Errors: ssg.EmptyTraining, ssg.DivergedLoss.
std::unique_ptr<NeuralSsg> train_neural_ssg(std::span<const TrainingExample> examples,
                                            const NeuralSsgConfig& config, int epochs,
                                            TrainLog* log = nullptr);

// ---------------------------------------------------------------------------
// Checkpoints: {"format":"multiesc-ssg","version":1,"kind":...,...}

inline constexpr int kModelVersion = 1;

std::string save(const SequenceModel& model);
// Errors: ssg.VersionMismatch, ssg.Corrupt.
std::unique_ptr<SequenceModel> load(std::string_view bytes);

}  // namespace multiesc::ssg
