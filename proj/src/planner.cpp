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

#include "multiesc/planner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "multiesc/error.hpp"

namespace multiesc::planner {

void validate(const PlannerConfig& config) {
  if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda)) {
    throw Error("planner", "BadConfig", "lambda must be a finite value >= 0");
  }
  if (config.plan_length < 1) throw Error("planner", "BadConfig", "plan length L must be >= 1");
  if (config.beam_size < 1) throw Error("planner", "BadConfig", "beam size k must be >= 1");
}

double guarded_log(double p) { return p < kProbFloor ? kLogZero : std::log(p); }

bool hypothesis_before(const BeamHypothesis& a, const BeamHypothesis& b) {
  if (a.logprob != b.logprob) return a.logprob > b.logprob;
  return a.future < b.future;
}

double history_score(const ssg::SequenceModel& model, const PlanContext& ctx, Strategy candidate) {
  return guarded_log(model.next_dist(ctx, {})[static_cast<std::size_t>(to_id(candidate))]);
}

namespace {

void check_args(Strategy candidate, int plan_length, int beam_size) {
  if (!is_planable(candidate)) throw Error("planner", "InvalidStrategy", "Other is not a candidate");
  if (plan_length < 1) throw Error("planner", "BadConfig", "plan length L must be >= 1");
  if (beam_size < 1) throw Error("planner", "BadConfig", "beam size k must be >= 1");
}

// Children of `parent` in id order, with logprobs accumulated left to right.
void expand(const ssg::SequenceModel& model, const PlanContext& ctx, Strategy candidate,
            const BeamHypothesis& parent, std::vector<BeamHypothesis>& out) {
  std::vector<Strategy> prefix{candidate};
  prefix.insert(prefix.end(), parent.future.begin(), parent.future.end());
  const auto dist = model.next_dist(ctx, prefix);
  for (const auto s : kPlanableStrategies) {
    BeamHypothesis child{parent.future, parent.logprob + guarded_log(dist[static_cast<std::size_t>(to_id(s))])};
    child.future.push_back(s);
    out.push_back(std::move(child));
  }
}

}  // namespace

std::vector<BeamHypothesis> beam_topk_futures(const ssg::SequenceModel& model,
                                              const PlanContext& ctx, Strategy candidate,
                                              int plan_length, int beam_size) {
  check_args(candidate, plan_length, beam_size);
  std::vector<BeamHypothesis> beam{BeamHypothesis{}};
  for (int step = 1; step < plan_length; ++step) {
    std::vector<BeamHypothesis> next;
    next.reserve(beam.size() * kNumPlanable);
    for (const auto& hyp : beam) expand(model, ctx, candidate, hyp, next);
    std::sort(next.begin(), next.end(), hypothesis_before);
    if (next.size() > static_cast<std::size_t>(beam_size)) next.resize(static_cast<std::size_t>(beam_size));
    beam = std::move(next);
  }
  return beam;
}

std::vector<BeamHypothesis> exact_topk_futures(const ssg::SequenceModel& model,
                                               const PlanContext& ctx, Strategy candidate,
                                               int plan_length, int beam_size) {
  check_args(candidate, plan_length, beam_size);
  std::size_t space = 1;
  for (int step = 1; step < plan_length; ++step) {
    space *= kNumPlanable;
    if (space > kMaxEnumeration) {
      throw Error("planner", "SpaceTooLarge",
                  "7^" + std::to_string(plan_length - 1) + " futures exceed the enumeration limit");
    }
  }
  std::vector<BeamHypothesis> level{BeamHypothesis{}};
  for (int step = 1; step < plan_length; ++step) {
    std::vector<BeamHypothesis> next;
    next.reserve(level.size() * kNumPlanable);
    for (const auto& hyp : level) expand(model, ctx, candidate, hyp, next);
    level = std::move(next);
  }
  std::sort(level.begin(), level.end(), hypothesis_before);
  if (level.size() > static_cast<std::size_t>(beam_size)) level.resize(static_cast<std::size_t>(beam_size));
  return level;
}

double lookahead_score(const ufp::FeedbackModel& ufp, const std::vector<BeamHypothesis>& futures,
                       Strategy candidate, const std::vector<StateVector>& states,
                       bool renormalize, std::vector<ScoredFuture>* scored) {
  if (futures.empty()) throw Error("planner", "EmptyFutures", "no futures to score");
  std::vector<double> probs;
  probs.reserve(futures.size());
  double mass = 0.0;
  for (const auto& hyp : futures) {
    probs.push_back(std::exp(hyp.logprob));
    mass += probs.back();
  }
  if (renormalize) {
    for (auto& p : probs) p = mass > 0.0 ? p / mass : 1.0 / static_cast<double>(probs.size());
  }
  double h = 0.0;
  std::vector<Strategy> sequence;
  for (std::size_t i = 0; i < futures.size(); ++i) {
    sequence.assign(1, candidate);
    sequence.insert(sequence.end(), futures[i].future.begin(), futures[i].future.end());
    const double f = ufp.predict(sequence, states);
    h += probs[i] * f;
    if (scored) scored->push_back(ScoredFuture{futures[i], f});
  }
  return h;
}

StrategyScore strategy_score(const ssg::SequenceModel& ssg, const ufp::FeedbackModel& ufp,
                             const PlanContext& ctx, Strategy candidate,
                             const PlannerConfig& config) {
  validate(config);
  StrategyScore score;
  score.candidate = candidate;
  score.g = history_score(ssg, ctx, candidate);
  const auto futures = beam_topk_futures(ssg, ctx, candidate, config.plan_length, config.beam_size);
  score.h = lookahead_score(ufp, futures, candidate, ctx.user_states, config.renormalize_topk, &score.beam);
  score.f = score.g + config.lambda * score.h;
  return score;
}

Plan select_strategy(const ssg::SequenceModel& ssg, const ufp::FeedbackModel& ufp,
                     const PlanContext& ctx, const PlannerConfig& config, Execution execution) {
  validate(config);
  Plan plan;
  plan.scores.resize(kNumPlanable);
  if (execution == Execution::kParallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < kNumPlanable; ++i) {
      try {
        plan.scores[i] = strategy_score(ssg, ufp, ctx, kPlanableStrategies[i], config);
      } catch (...) {
#pragma omp critical(multiesc_planner_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::size_t i = 0; i < kNumPlanable; ++i) {
      plan.scores[i] = strategy_score(ssg, ufp, ctx, kPlanableStrategies[i], config);
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumPlanable; ++i) {
    if (plan.scores[i].f > plan.scores[best].f) best = i;
  }
  plan.chosen = plan.scores[best].candidate;
  return plan;
}

std::vector<Strategy> ranking(const Plan& plan) {
  std::vector<const StrategyScore*> order;
  for (const auto& s : plan.scores) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](const StrategyScore* a, const StrategyScore* b) {
    if (a->f != b->f) return a->f > b->f;
    return to_id(a->candidate) < to_id(b->candidate);
  });
  std::vector<Strategy> out;
  for (const auto* s : order) out.push_back(s->candidate);
  return out;
}

nlohmann::json plan_to_json(const Plan& plan) {
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& s : plan.scores) {
    nlohmann::json beam = nlohmann::json::array();
    for (const auto& b : s.beam) {
      nlohmann::json future = nlohmann::json::array();
      for (auto x : b.hypothesis.future) future.push_back(strategy_name(x));
      beam.push_back({{"future", std::move(future)},
                      {"prob", std::exp(b.hypothesis.logprob)},
                      {"feedback", b.feedback}});
    }
    candidates.push_back({{"strategy", strategy_name(s.candidate)},
                          {"g", s.g},
                          {"h", s.h},
                          {"F", s.f},
                          {"beam", std::move(beam)}});
  }
  return {{"candidates", std::move(candidates)}, {"chosen", strategy_name(plan.chosen)}};
}

}  // namespace multiesc::planner
