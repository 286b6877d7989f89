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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "multiesc/planner.hpp"

namespace multiesc::eval {

struct ConfusionMatrix {
  // counts[truth][predicted]
  std::array<std::array<std::uint64_t, kNumPlanable>, kNumPlanable> counts{};

  void add(Strategy truth, Strategy predicted);
  std::uint64_t total() const;
};

// Errors: eval.EmptyMatrix.
double accuracy(const ConfusionMatrix& cm);
double weighted_f1(const ConfusionMatrix& cm);

// Fraction of decisions whose truth sits within the first n of its ranking.
double top_n_accuracy(const std::vector<std::vector<Strategy>>& rankings,
                      const std::vector<Strategy>& truths, int n);

enum class FeedbackMode { kSingleStep, kContinuation };

struct Decision {
  Strategy chosen;
  std::vector<Strategy> continuation;  // ground truth after s_t
  std::vector<StateVector> states;
};

// Mean UFP prediction over decisions. Errors: eval.EmptyDecisions.
double feedback_metric(const ufp::FeedbackModel& ufp, const std::vector<Decision>& decisions,
                       FeedbackMode mode = FeedbackMode::kSingleStep);

struct Metrics {
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  double feedback = 0.0;
  std::map<int, double> top_n;
  std::size_t decisions = 0;
};

// Reported reference numbers for the full planner and the no-lookahead
// variant; kept for the report, not reproduced at desk scale.
inline constexpr double kReferenceAccuracy = 42.01;
inline constexpr double kReferenceWeightedF1 = 34.01;
inline constexpr double kReferenceFeedback = 3.85;
inline constexpr double kReferenceFeedbackNoLookahead = 3.36;

struct EvalOptions {
  FeedbackMode feedback_mode = FeedbackMode::kSingleStep;
  planner::Execution execution = planner::Execution::kParallel;
  // Model used for the feedback metric; the planning UFP when null.
  const ufp::FeedbackModel* metric_ufp = nullptr;
  std::vector<int> top_n = {1, 2, 3};
};

// Plans every decision. Decisions whose truth is Other are skipped.
// Errors: eval.EmptyTestSet.
Metrics run_eval(const ssg::SequenceModel& ssg, const ufp::FeedbackModel& ufp,
                 std::span<const ssg::TrainingExample> test, const planner::PlannerConfig& config,
                 const EvalOptions& options = {});

nlohmann::json metrics_to_json(const Metrics& m);

enum class SweepAxis { kBeamSize, kLambda, kPlanLength };

std::string axis_name(SweepAxis axis);
// Errors: eval.BadAxis.
SweepAxis axis_from_name(const std::string& name);

struct SweepPoint {
  double value;
  Metrics metrics;
};

struct SweepResult {
  SweepAxis axis;
  std::vector<SweepPoint> points;
};

// Errors: eval.BadSweep (values not strictly increasing or empty).
SweepResult sweep(SweepAxis axis, const std::vector<double>& values,
                  const planner::PlannerConfig& base, const ssg::SequenceModel& ssg,
                  const ufp::FeedbackModel& ufp, std::span<const ssg::TrainingExample> test,
                  const EvalOptions& options = {});

// Header: axis,value,accuracy,weighted_f1,feedback,top1,top2,top3
std::string sweep_to_csv(const SweepResult& result);

}  // namespace multiesc::eval
