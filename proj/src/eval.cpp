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

#include "multiesc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>

#include "multiesc/error.hpp"

namespace multiesc::eval {

void ConfusionMatrix::add(Strategy truth, Strategy predicted) {
  if (!is_planable(truth) || !is_planable(predicted)) {
    throw Error("eval", "InvalidStrategy", "Other has no row in the confusion matrix");
  }
  ++counts[static_cast<std::size_t>(to_id(truth))][static_cast<std::size_t>(to_id(predicted))];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts) {
    for (auto c : row) n += c;
  }
  return n;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw Error("eval", "EmptyMatrix", "no decisions were counted");
  std::uint64_t trace = 0;
  for (std::size_t c = 0; c < kNumPlanable; ++c) trace += cm.counts[c][c];
  return static_cast<double>(trace) / static_cast<double>(total);
}

double weighted_f1(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw Error("eval", "EmptyMatrix", "no decisions were counted");
  double weighted = 0.0;
  for (std::size_t c = 0; c < kNumPlanable; ++c) {
    std::uint64_t support = 0, predicted = 0;
    for (std::size_t o = 0; o < kNumPlanable; ++o) {
      support += cm.counts[c][o];
      predicted += cm.counts[o][c];
    }
    if (support == 0) continue;
    const double tp = static_cast<double>(cm.counts[c][c]);
    const double precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    const double recall = tp / static_cast<double>(support);
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    weighted += static_cast<double>(support) / static_cast<double>(total) * f1;
  }
  return weighted;
}

double top_n_accuracy(const std::vector<std::vector<Strategy>>& rankings,
                      const std::vector<Strategy>& truths, int n) {
  if (rankings.size() != truths.size()) {
    throw Error("eval", "SizeMismatch", "one ranking per truth is required");
  }
  if (rankings.empty()) throw Error("eval", "EmptyDecisions", "no rankings");
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    const auto& r = rankings[i];
    const auto end = r.begin() + std::min<std::ptrdiff_t>(std::max(n, 0), static_cast<std::ptrdiff_t>(r.size()));
    if (std::find(r.begin(), end, truths[i]) != end) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

double feedback_metric(const ufp::FeedbackModel& ufp, const std::vector<Decision>& decisions,
                       FeedbackMode mode) {
  if (decisions.empty()) throw Error("eval", "EmptyDecisions", "no decisions to score");
  double total = 0.0;
  for (const auto& d : decisions) {
    std::vector<Strategy> seq{d.chosen};
    if (mode == FeedbackMode::kContinuation) {
      for (auto s : d.continuation) {
        if (static_cast<int>(seq.size()) >= ufp.max_len()) break;
        seq.push_back(s);
      }
    }
    total += ufp.predict(seq, d.states);
  }
  return total / static_cast<double>(decisions.size());
}

Metrics run_eval(const ssg::SequenceModel& ssg, const ufp::FeedbackModel& ufp,
                 std::span<const ssg::TrainingExample> test, const planner::PlannerConfig& config,
                 const EvalOptions& options) {
  planner::validate(config);
  std::vector<const ssg::TrainingExample*> usable;
  for (const auto& ex : test) {
    if (!ex.target.empty() && is_planable(ex.target.front())) usable.push_back(&ex);
  }
  if (usable.empty()) throw Error("eval", "EmptyTestSet", "no test decisions with a planable truth");

  // Each slot is written by exactly one iteration; the reduction below runs
  // serially in example order.
  std::vector<planner::Plan> plans(usable.size());
  const auto n = static_cast<std::ptrdiff_t>(usable.size());
  if (options.execution == planner::Execution::kParallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        plans[static_cast<std::size_t>(i)] = planner::select_strategy(
            ssg, ufp, usable[static_cast<std::size_t>(i)]->context, config, planner::Execution::kSerial);
      } catch (...) {
#pragma omp critical(multiesc_eval_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      plans[static_cast<std::size_t>(i)] = planner::select_strategy(
          ssg, ufp, usable[static_cast<std::size_t>(i)]->context, config, planner::Execution::kSerial);
    }
  }

  ConfusionMatrix cm;
  std::vector<std::vector<Strategy>> rankings;
  std::vector<Strategy> truths;
  std::vector<Decision> decisions;
  for (std::size_t i = 0; i < usable.size(); ++i) {
    const auto& ex = *usable[i];
    cm.add(ex.target.front(), plans[i].chosen);
    rankings.push_back(planner::ranking(plans[i]));
    truths.push_back(ex.target.front());
    decisions.push_back(Decision{plans[i].chosen,
                                 std::vector<Strategy>(ex.target.begin() + 1, ex.target.end()),
                                 ex.context.user_states});
  }
  Metrics m;
  m.accuracy = accuracy(cm);
  m.weighted_f1 = weighted_f1(cm);
  m.feedback = feedback_metric(options.metric_ufp ? *options.metric_ufp : ufp, decisions,
                               options.feedback_mode);
  for (int k : options.top_n) m.top_n[k] = top_n_accuracy(rankings, truths, k);
  m.decisions = usable.size();
  return m;
}

nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json top = nlohmann::json::object();
  for (const auto& [k, v] : m.top_n) top[std::to_string(k)] = v;
  return {{"accuracy", m.accuracy},
          {"weighted_f1", m.weighted_f1},
          {"feedback", m.feedback},
          {"top_n", std::move(top)},
          {"decisions", m.decisions}};
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kBeamSize: return "k";
    case SweepAxis::kLambda: return "lambda";
    case SweepAxis::kPlanLength: return "L";
  }
  return "?";
}

SweepAxis axis_from_name(const std::string& name) {
  if (name == "k" || name == "beam_size") return SweepAxis::kBeamSize;
  if (name == "lambda") return SweepAxis::kLambda;
  if (name == "L" || name == "plan_length") return SweepAxis::kPlanLength;
  throw Error("eval", "BadAxis", "unknown sweep axis '" + name + "' (expected k, lambda or L)");
}

SweepResult sweep(SweepAxis axis, const std::vector<double>& values,
                  const planner::PlannerConfig& base, const ssg::SequenceModel& ssg,
                  const ufp::FeedbackModel& ufp, std::span<const ssg::TrainingExample> test,
                  const EvalOptions& options) {
  if (values.empty()) throw Error("eval", "BadSweep", "no sweep values");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) throw Error("eval", "BadSweep", "sweep values must be strictly increasing");
  }
  SweepResult result{axis, {}};
  for (double v : values) {
    planner::PlannerConfig config = base;
    if (axis == SweepAxis::kLambda) {
      config.lambda = v;
    } else {
      if (v != std::floor(v)) throw Error("eval", "BadSweep", axis_name(axis) + " values must be integers");
      (axis == SweepAxis::kBeamSize ? config.beam_size : config.plan_length) = static_cast<int>(v);
    }
    result.points.push_back(SweepPoint{v, run_eval(ssg, ufp, test, config, options)});
  }
  return result;
}

std::string sweep_to_csv(const SweepResult& result) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  std::string out = "axis,value,accuracy,weighted_f1,feedback,top1,top2,top3\n";
  for (const auto& p : result.points) {
    out += axis_name(result.axis) + "," + num(p.value) + "," + num(p.metrics.accuracy) + "," +
           num(p.metrics.weighted_f1) + "," + num(p.metrics.feedback);
    for (int k = 1; k <= 3; ++k) {
      auto it = p.metrics.top_n.find(k);
      out += "," + (it == p.metrics.top_n.end() ? std::string() : num(it->second));
    }
    out += "\n";
  }
  return out;
}

}  // namespace multiesc::eval
