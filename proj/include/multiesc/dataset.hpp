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

#include <string>
#include <string_view>
#include <vector>

#include "multiesc/corpus.hpp"
#include "multiesc/feedback.hpp"
#include "multiesc/lexicon.hpp"
#include "multiesc/seqmodel.hpp"
#include "multiesc/user_state.hpp"

// Resolved training examples (user states and emotion ids filled in) and the
// line-delimited JSON files that carry them between commands.
namespace multiesc::dataset {

struct PlanningRecord {
  std::string dialogue_id;
  std::string split;
  ssg::TrainingExample example;
};

struct FeedbackRecord {
  std::string dialogue_id;
  int round = 0;
  std::string split;
  ufp::TrainingExample example;
};

struct BuildOptions {
  int plan_length = 2;
  std::size_t window = 64;
  user_state::OovMode oov = user_state::OovMode::kSpecialBin;
};

struct Records {
  std::vector<PlanningRecord> planning;
  std::vector<FeedbackRecord> feedback;
  std::size_t state_dim = 0;
};

Records build_records(const std::vector<corpus::Dialogue>& dialogues,
                      const corpus::Splits& splits, const lexicon::VadLexicon& lex,
                      const BuildOptions& options);

inline constexpr int kExamplesVersion = 1;

// First line: {"format":..., "version":1, "state_dim":d, "count":n} plus any
// `meta` fields; then one {context, target, states, score} record per line.
std::string write_planning(const std::vector<PlanningRecord>& records, std::size_t state_dim,
                           const nlohmann::json& meta = nlohmann::json::object());
std::string write_feedback(const std::vector<FeedbackRecord>& records, std::size_t state_dim,
                           const nlohmann::json& meta = nlohmann::json::object());

// Errors: dataset.VersionMismatch, dataset.Corrupt.
std::vector<PlanningRecord> read_planning(std::string_view text);
std::vector<FeedbackRecord> read_feedback(std::string_view text);

std::vector<ssg::TrainingExample> planning_split(const std::vector<PlanningRecord>& records,
                                                 std::string_view split);
std::vector<ufp::TrainingExample> feedback_split(const std::vector<FeedbackRecord>& records,
                                                 std::string_view split);

nlohmann::json context_to_json(const PlanContext& ctx);
// Strategy entries may be names or ids. Errors: dataset.Corrupt.
PlanContext context_from_json(const nlohmann::json& j);

}  // namespace multiesc::dataset
