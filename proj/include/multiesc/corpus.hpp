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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "multiesc/strategy.hpp"
#include "multiesc/text.hpp"

namespace multiesc::corpus {

enum class Speaker { kSeeker, kSupporter };

struct Turn {
  Speaker speaker = Speaker::kSeeker;
  Tokens text;
  std::optional<std::string> raw_strategy;
  std::optional<Strategy> strategy;  // set iff speaker is kSupporter
  std::optional<int> feedback;       // 1..5, seeker turns only
  std::optional<Tokens> cause_span;
  // Adapted label of every original utterance merged into this turn.
  std::vector<Strategy> utterance_strategies;
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;
};

// A round pairs the supporter turn x_i with the seeker reply y_i. Either side
// may be missing: the opening round when the seeker speaks first, or the last
// round when the supporter speaks last.
struct Round {
  std::optional<std::size_t> supporter;  // index into Dialogue::turns
  std::optional<std::size_t> seeker;
};

std::vector<Round> rounds(const Dialogue& dialogue);

// Parses an ESConv-style JSON array. Consecutive same-speaker turns are
// merged (text concatenated, last strategy label wins), and feedback found on
// a supporter turn is moved to the next seeker turn (or the previous one at
// the end of the dialogue).
//
// Errors: corpus.MalformedJson (message carries the byte offset),
// corpus.SchemaViolation, corpus.EmptyCorpus, corpus.UnknownLabel.
std::vector<Dialogue> parse_esconv(std::string_view json_text);

// Taxonomy adaptation: "Providing Suggestions" and "Information" merge,
// "Others" becomes Greetings when the opening tokens match a greeting pattern
// and Other otherwise. An absent label maps to Other.
//
// Errors: corpus.UnknownLabel.
Strategy adapt_strategy(const std::optional<std::string>& raw, const Tokens& text);

// True when one of the greeting patterns occurs within the first six tokens.
bool is_greeting(const Tokens& text);

struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Deterministic 8:1:1 split over dialogue indices. Errors: corpus.TooFewDialogues.
Splits split_corpus(std::size_t num_dialogues, std::uint64_t seed);

struct PlanningExample {
  std::string dialogue_id;
  int round = 0;                 // 1-based round index t
  int num_rounds = 0;            // rounds in the whole dialogue
  std::vector<int> history;      // strategy ids of rounds 1..t-1 (Other kept)
  Tokens window;                 // last `window` tokens before x_t
  std::vector<int> user_states;  // round indices 1..t-1
  std::vector<Strategy> target;  // s_t.. up to L planable strategies
};

struct FeedbackExample {
  std::string dialogue_id;
  int round = 0;                  // round carrying the annotation
  std::vector<Strategy> strategy_sequence;
  std::vector<int> user_states;   // round indices strictly before the window
  double score = 0.0;
  bool is_augmented = false;
};

std::vector<PlanningExample> make_planning_examples(const Dialogue& dialogue, int max_len,
                                                    std::size_t window = 512);

std::vector<FeedbackExample> make_feedback_examples(const Dialogue& dialogue, int max_len);

}  // namespace multiesc::corpus
