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

#include "multiesc/dataset.hpp"

#include <algorithm>
#include <sstream>

#include "multiesc/error.hpp"

namespace multiesc::dataset {

namespace {

using nlohmann::json;

std::string split_of(std::size_t index, const corpus::Splits& splits) {
  auto in = [index](const std::vector<std::size_t>& v) { return std::binary_search(v.begin(), v.end(), index); };
  if (in(splits.train)) return "train";
  if (in(splits.validation)) return "validation";
  if (in(splits.test)) return "test";
  return "unassigned";
}

std::vector<StateVector> gather(const std::vector<StateVector>& all, const std::vector<int>& rounds) {
  std::vector<StateVector> out;
  out.reserve(rounds.size());
  for (int r : rounds) out.push_back(all.at(static_cast<std::size_t>(r - 1)));
  return out;
}

json ids_json(const std::vector<Strategy>& s) {
  json out = json::array();
  for (auto x : s) out.push_back(to_id(x));
  return out;
}

Strategy strategy_from_json(const json& j) {
  if (j.is_string()) {
    auto s = strategy_from_name(j.get<std::string>());
    if (!s) throw Error("dataset", "Corrupt", "unknown strategy " + j.dump());
    return *s;
  }
  if (!j.is_number_integer()) throw Error("dataset", "Corrupt", "strategy must be a name or an id");
  try {
    return strategy_from_id(j.get<int>());
  } catch (const Error& e) {
    throw Error("dataset", "Corrupt", e.what());
  }
}

std::vector<Strategy> strategies_from_json(const json& j) {
  if (!j.is_array()) throw Error("dataset", "Corrupt", "strategy list must be an array");
  std::vector<Strategy> out;
  for (const auto& s : j) out.push_back(strategy_from_json(s));
  return out;
}

std::vector<StateVector> states_from_json(const json& j, std::size_t state_dim) {
  auto states = j.get<std::vector<StateVector>>();
  for (const auto& u : states) {
    if (state_dim && u.size() != state_dim) throw Error("dataset", "Corrupt", "user state of the wrong dimension");
  }
  return states;
}

// Splits the text into lines, parses the header and checks the format tag.
std::vector<json> parse_lines(std::string_view text, std::string_view format, std::size_t& state_dim) {
  std::vector<json> lines;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      lines.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error("dataset", "Corrupt", "line " + std::to_string(number) + ": " + e.what());
    }
  }
  if (lines.empty()) throw Error("dataset", "Corrupt", "missing header line");
  const auto& header = lines.front();
  if (!header.is_object() || header.value("format", "") != format) {
    throw Error("dataset", "Corrupt", "expected a " + std::string(format) + " file");
  }
  if (header.value("version", -1) != kExamplesVersion) {
    throw Error("dataset", "VersionMismatch",
                "examples version " + header.value("version", json()).dump() + ", expected " +
                    std::to_string(kExamplesVersion));
  }
  state_dim = header.value("state_dim", std::size_t{0});
  if (header.value("count", std::size_t{0}) != lines.size() - 1) {
    throw Error("dataset", "Corrupt", "record count disagrees with the header");
  }
  lines.erase(lines.begin());
  return lines;
}

std::string header(const json& meta, std::string_view format, std::size_t state_dim,
                   std::size_t count) {
  json h = meta.is_object() ? meta : json::object();
  h["format"] = format;
  h["version"] = kExamplesVersion;
  h["state_dim"] = state_dim;
  h["count"] = count;
  return h.dump() + "\n";
}

}  // namespace

Records build_records(const std::vector<corpus::Dialogue>& dialogues, const corpus::Splits& splits,
                      const lexicon::VadLexicon& lex, const BuildOptions& options) {
  Records records;
  records.state_dim = static_cast<std::size_t>(user_state::layout_for(lex).dimension());
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    const auto& d = dialogues[i];
    const std::string split = split_of(i, splits);
    const int num_rounds = static_cast<int>(corpus::rounds(d).size());
    std::vector<StateVector> all;
    for (auto& s : user_state::build_sequence(d, num_rounds + 1, lex, options.oov).states) {
      all.push_back(std::move(s.vector));
    }
    for (auto& ex : corpus::make_planning_examples(d, options.plan_length, options.window)) {
      PlanningRecord rec;
      rec.dialogue_id = d.id;
      rec.split = split;
      auto& ctx = rec.example.context;
      ctx.history = ex.history;
      ctx.window_emotions = lexicon::emotion_ids(ex.window, lex);
      ctx.window = std::move(ex.window);
      ctx.user_states = gather(all, ex.user_states);
      ctx.round = ex.round;
      ctx.num_rounds = ex.num_rounds;
      rec.example.target = std::move(ex.target);
      records.planning.push_back(std::move(rec));
    }
    for (auto& ex : corpus::make_feedback_examples(d, options.plan_length)) {
      FeedbackRecord rec;
      rec.dialogue_id = d.id;
      rec.round = ex.round;
      rec.split = split;
      rec.example.sequence = std::move(ex.strategy_sequence);
      rec.example.states = gather(all, ex.user_states);
      rec.example.score = ex.score;
      rec.example.is_augmented = ex.is_augmented;
      records.feedback.push_back(std::move(rec));
    }
  }
  return records;
}

json context_to_json(const PlanContext& ctx) {
  return {{"history", ctx.history},
          {"window", ctx.window},
          {"window_emotions", ctx.window_emotions},
          {"user_states", ctx.user_states},
          {"round", ctx.round},
          {"num_rounds", ctx.num_rounds}};
}

PlanContext context_from_json(const json& j) {
  if (!j.is_object()) throw Error("dataset", "Corrupt", "context must be a JSON object");
  try {
    PlanContext ctx;
    if (j.contains("history")) {
      for (const auto& s : j.at("history")) ctx.history.push_back(to_id(strategy_from_json(s)));
    }
    if (j.contains("window")) {
      const auto& w = j.at("window");
      ctx.window = w.is_string() ? tokenize(w.get<std::string>()) : w.get<Tokens>();
    }
    if (j.contains("window_emotions")) ctx.window_emotions = j.at("window_emotions").get<std::vector<int>>();
    if (!ctx.window_emotions.empty() && ctx.window_emotions.size() != ctx.window.size()) {
      throw Error("dataset", "Corrupt", "window_emotions must align with window");
    }
    if (j.contains("user_states")) ctx.user_states = states_from_json(j.at("user_states"), 0);
    ctx.round = j.value("round", 1);
    ctx.num_rounds = j.value("num_rounds", 0);
    return ctx;
  } catch (const json::exception& e) {
    throw Error("dataset", "Corrupt", std::string("malformed context: ") + e.what());
  }
}

std::string write_planning(const std::vector<PlanningRecord>& records, std::size_t state_dim,
                           const json& meta) {
  std::string out = header(meta, "multiesc-planning", state_dim, records.size());
  for (const auto& r : records) {
    out += json{{"dialogue_id", r.dialogue_id},
                {"split", r.split},
                {"context", context_to_json(r.example.context)},
                {"target", ids_json(r.example.target)}}
               .dump() +
           "\n";
  }
  return out;
}

std::string write_feedback(const std::vector<FeedbackRecord>& records, std::size_t state_dim,
                           const json& meta) {
  std::string out = header(meta, "multiesc-feedback", state_dim, records.size());
  for (const auto& r : records) {
    out += json{{"dialogue_id", r.dialogue_id},
                {"round", r.round},
                {"split", r.split},
                {"sequence", ids_json(r.example.sequence)},
                {"states", r.example.states},
                {"score", r.example.score},
                {"is_augmented", r.example.is_augmented}}
               .dump() +
           "\n";
  }
  return out;
}

std::vector<PlanningRecord> read_planning(std::string_view text) {
  std::size_t state_dim = 0;
  std::vector<PlanningRecord> out;
  for (const auto& line : parse_lines(text, "multiesc-planning", state_dim)) {
    try {
      PlanningRecord r;
      r.dialogue_id = line.at("dialogue_id").get<std::string>();
      r.split = line.at("split").get<std::string>();
      r.example.context = context_from_json(line.at("context"));
      for (const auto& u : r.example.context.user_states) {
        if (u.size() != state_dim) throw Error("dataset", "Corrupt", "user state of the wrong dimension");
      }
      r.example.target = strategies_from_json(line.at("target"));
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error("dataset", "Corrupt", std::string("malformed planning record: ") + e.what());
    }
  }
  return out;
}

std::vector<FeedbackRecord> read_feedback(std::string_view text) {
  std::size_t state_dim = 0;
  std::vector<FeedbackRecord> out;
  for (const auto& line : parse_lines(text, "multiesc-feedback", state_dim)) {
    try {
      FeedbackRecord r;
      r.dialogue_id = line.at("dialogue_id").get<std::string>();
      r.round = line.at("round").get<int>();
      r.split = line.at("split").get<std::string>();
      r.example.sequence = strategies_from_json(line.at("sequence"));
      r.example.states = states_from_json(line.at("states"), state_dim);
      r.example.score = line.at("score").get<double>();
      r.example.is_augmented = line.value("is_augmented", false);
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error("dataset", "Corrupt", std::string("malformed feedback record: ") + e.what());
    }
  }
  return out;
}

std::vector<ssg::TrainingExample> planning_split(const std::vector<PlanningRecord>& records,
                                                 std::string_view split) {
  std::vector<ssg::TrainingExample> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(r.example);
  }
  return out;
}

std::vector<ufp::TrainingExample> feedback_split(const std::vector<FeedbackRecord>& records,
                                                 std::string_view split) {
  std::vector<ufp::TrainingExample> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(r.example);
  }
  return out;
}

}  // namespace multiesc::dataset
