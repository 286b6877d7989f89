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

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "multiesc/context.hpp"
#include "multiesc/neuralcore.hpp"
#include "multiesc/seqmodel.hpp"

namespace multiesc::ufp {

inline constexpr double kMinScore = 1.0;
inline constexpr double kMaxScore = 5.0;

struct TrainingExample {
  std::vector<Strategy> sequence;
  std::vector<StateVector> states;
  double score = 0.0;
  bool is_augmented = false;
};

// f(s_{>=t}, U_t). predict() clamps to the Likert range; raw() does not.
class FeedbackModel {
 public:
  virtual ~FeedbackModel() = default;

  virtual std::string kind() const = 0;
  virtual int max_len() const = 0;
  virtual nlohmann::json to_json() const = 0;

  // Errors: ufp.EmptySequence, ufp.SequenceTooLong, ufp.InvalidStrategy.
  double predict(std::span<const Strategy> sequence, const std::vector<StateVector>& states) const;
  double raw(std::span<const Strategy> sequence, const std::vector<StateVector>& states) const;

 protected:
  virtual double compute(std::span<const Strategy> sequence,
                         const std::vector<StateVector>& states) const = 0;
};

// ---------------------------------------------------------------------------
// Linear reference backend.

inline constexpr std::size_t kNumUnigrams = kNumPlanable;
inline constexpr std::size_t kNumBigrams = kNumPlanable * kNumPlanable;

inline std::size_t feature_dim(std::size_t state_dim) {
  return kNumUnigrams + kNumBigrams + 1 + state_dim;
}

// Unigram indicators, bigram indicators, sequence length, then the latest
// user state (zeros when there is none). Errors: ufp.EmptySequence,
// ufp.StateDimMismatch.
std::vector<double> featurize_sequence(std::span<const Strategy> sequence,
                                       const std::vector<StateVector>& states,
                                       std::size_t state_dim);

class LinearUfp final : public FeedbackModel {
 public:
  LinearUfp(std::size_t state_dim, int max_len, std::vector<double> weights, double bias);

  std::string kind() const override { return "linear"; }
  int max_len() const override { return max_len_; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<LinearUfp> from_json(const nlohmann::json& j);

  std::size_t state_dim() const { return state_dim_; }
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

 protected:
  double compute(std::span<const Strategy> sequence,
                 const std::vector<StateVector>& states) const override;

 private:
  std::size_t state_dim_;
  int max_len_;
  std::vector<double> weights_;
  double bias_;
};

// Closed-form ridge on featurize_sequence with an unpenalized intercept:
// (Phi^T Phi + ridge * D) theta = Phi^T y, D = diag(1, ..., 1, 0).
// Errors: ufp.EmptyTraining, ufp.StateDimMismatch.
std::unique_ptr<LinearUfp> train_linear(std::span<const TrainingExample> examples, double ridge,
                                        int max_len);

// ---------------------------------------------------------------------------
// Table backend: exact sequences map to scores, everything else to a default.

class TableUfp final : public FeedbackModel {
 public:
  TableUfp(int max_len, double fallback) : max_len_(max_len), fallback_(fallback) {}
  void set(std::vector<Strategy> sequence, double score);

  std::string kind() const override { return "table"; }
  int max_len() const override { return max_len_; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<TableUfp> from_json(const nlohmann::json& j);

 protected:
  double compute(std::span<const Strategy> sequence,
                 const std::vector<StateVector>& states) const override;

 private:
  int max_len_;
  double fallback_;
  std::map<std::vector<int>, double> table_;
};

// ---------------------------------------------------------------------------
// Neural backend: [CLS] ⊕ E_s rows -> self-attention + FFN encoder -> q_s;
// user states -> LSTM -> attention with W_a -> u_f -> scalar head.

struct NeuralUfpConfig {
  std::size_t d_emb = 32;
  int heads = 2;
  std::size_t d_ff = 64;
  std::size_t state_dim = 69;
  int max_len = 8;
  // Feed [u_f ; q_s] to the head instead of u_f alone.
  bool head_sees_query = false;
  double lr = 1e-3;
  double weight_decay = 0.0;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
};

class NeuralUfp final : public FeedbackModel {
 public:
  explicit NeuralUfp(NeuralUfpConfig config);
  NeuralUfp(NeuralUfpConfig config, nn::ParamStore params);

  std::string kind() const override { return "neural"; }
  int max_len() const override { return config_.max_len; }
  nlohmann::json to_json() const override;
  static std::unique_ptr<NeuralUfp> from_json(const nlohmann::json& j);

  const NeuralUfpConfig& config() const { return config_; }
  nn::ParamStore& params() { return *params_; }
  const nn::ParamStore& params() const { return *params_; }

  // Unclamped 1x1 score. The state memory is zero-padded to `pad_to` rows
  // (when larger); padded rows are masked out of the attention.
  nn::Var forward(nn::Tape& tape, std::span<const Strategy> sequence,
                  const std::vector<StateVector>& states, std::size_t pad_to = 0) const;
  nn::Var batch_loss(nn::Tape& tape, std::span<const TrainingExample> batch) const;

 protected:
  double compute(std::span<const Strategy> sequence,
                 const std::vector<StateVector>& states) const override;

 private:
  void bind();

  NeuralUfpConfig config_;
  std::unique_ptr<nn::ParamStore> params_;
  nn::MultiHeadAttention encoder_attn_;
  nn::FeedForwardBlock encoder_ffn_;
  nn::Lstm lstm_;
  nn::Linear head_;
};

// Errors: ufp.EmptyTraining, ufp.DivergedLoss.
std::unique_ptr<NeuralUfp> train_neural(std::span<const TrainingExample> examples,
                                        const NeuralUfpConfig& config, int epochs,
                                        ssg::TrainLog* log = nullptr);

// Appends `count` uniform random planable sequences of length 1..max_len with
// score 1, each paired with a prefix of the user states of a randomly chosen
// non-augmented example.
std::vector<TrainingExample> augment(std::vector<TrainingExample> examples, std::size_t count,
                                     int max_len, std::uint64_t seed);

// {"format":"multiesc-ufp","version":1,"kind":...}
std::string save(const FeedbackModel& model);
// Errors: ufp.VersionMismatch, ufp.Corrupt.
std::unique_ptr<FeedbackModel> load(std::string_view bytes);

}  // namespace multiesc::ufp
