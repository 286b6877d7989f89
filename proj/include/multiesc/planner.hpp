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

#include <utility>
#include <vector>

#include "json.hpp"
#include "multiesc/context.hpp"
#include "multiesc/feedback.hpp"
#include "multiesc/seqmodel.hpp"

namespace multiesc::planner {

struct PlannerConfig {
  double lambda = 0.7;
  int plan_length = 2;  // L: candidate plus L-1 future strategies
  int beam_size = 6;    // k
  bool renormalize_topk = false;
};

// Errors: planner.BadConfig.
void validate(const PlannerConfig& config);

struct BeamHypothesis {
  std::vector<Strategy> future;
  double logprob = 0.0;
};

struct ScoredFuture {
  BeamHypothesis hypothesis;
  double feedback = 0.0;
};

struct StrategyScore {
  Strategy candidate = Strategy::kQuestion;
  double g = 0.0;
  double h = 0.0;
  double f = 0.0;
  std::vector<ScoredFuture> beam;
};

// Probabilities below this are scored as kLogZero.
inline constexpr double kProbFloor = 1e-300;
inline constexpr double kLogZero = -1e9;

double guarded_log(double p);

// Descending logprob; ties ordered lexicographically by strategy id.
bool hypothesis_before(const BeamHypothesis& a, const BeamHypothesis& b);

// g = log Pr(s_t | H_t, U_t).
double history_score(const ssg::SequenceModel& model, const PlanContext& ctx, Strategy candidate);

// Width-k beam over L-1 future steps.
std::vector<BeamHypothesis> beam_topk_futures(const ssg::SequenceModel& model,
                                              const PlanContext& ctx, Strategy candidate,
                                              int plan_length, int beam_size);

// Exact top-k by enumerating all 7^(L-1) futures. Errors: planner.SpaceTooLarge.
std::vector<BeamHypothesis> exact_topk_futures(const ssg::SequenceModel& model,
                                               const PlanContext& ctx, Strategy candidate,
                                               int plan_length, int beam_size);

inline constexpr std::size_t kMaxEnumeration = 1000000;

// h = sum_i p_i * f([candidate] ⊕ future_i, U_t); with `renormalize` the p_i
// are divided by their sum first. Errors: planner.EmptyFutures.
double lookahead_score(const ufp::FeedbackModel& ufp, const std::vector<BeamHypothesis>& futures,
                       Strategy candidate, const std::vector<StateVector>& states,
                       bool renormalize, std::vector<ScoredFuture>* scored = nullptr);

StrategyScore strategy_score(const ssg::SequenceModel& ssg, const ufp::FeedbackModel& ufp,
                             const PlanContext& ctx, Strategy candidate,
                             const PlannerConfig& config);

enum class Execution { kSerial, kParallel };

struct Plan {
  Strategy chosen = Strategy::kQuestion;
  std::vector<StrategyScore> scores;  // one per planable strategy, id order
};

// argmax F over the 7 planable candidates; ties go to the lower id. The
// parallel path scores candidates concurrently and yields the same Plan.
Plan select_strategy(const ssg::SequenceModel& ssg, const ufp::FeedbackModel& ufp,
                     const PlanContext& ctx, const PlannerConfig& config,
                     Execution execution = Execution::kParallel);

// Candidates sorted by F descending, ties by id.
std::vector<Strategy> ranking(const Plan& plan);

// {candidates: [{strategy, g, h, F, beam: [{future, prob, feedback}]}], chosen}
nlohmann::json plan_to_json(const Plan& plan);

}  // namespace multiesc::planner
