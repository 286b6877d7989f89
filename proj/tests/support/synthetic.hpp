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
#include <cstdint>
#include <optional>
#include <string>

#include "multiesc/dataset.hpp"
#include "multiesc/strategy.hpp"

// Generators for corpora and lexicons with known generating processes.
namespace multiesc::testing {

// Rows `word<TAB>V<TAB>A<TAB>D` under a header line. The first rows are a
// fixed set of emotion words (used by the corpus generator), then
// `rows - fixed` random words; corner values 0 and 1 appear on both axes.
std::string synthetic_lexicon(std::size_t rows, std::uint64_t seed);

struct CorpusSpec {
  std::size_t dialogues = 50;
  int min_rounds = 6;
  int max_rounds = 12;
  std::uint64_t seed = 1;
  // Probability that a later supporter turn is labelled "Others" without a
  // greeting (an Other round).
  double other_rate = 0.05;
  // Probability that a supporter turn is split into two utterances, which
  // the parser merges back.
  double split_rate = 0.05;
  // When set, strategies are drawn i.i.d. from `marginal` instead of the
  // seeded random first-order chain.
  std::optional<std::array<double, kNumPlanable>> marginal;
  // Feedback every two rounds: base + bonus per occurrence of `planted`
  // among the two most recent supporter strategies, plus uniform noise in
  // [-noise, noise], rounded and clamped to 1..5.
  std::optional<Strategy> planted;
  double feedback_base = 2.0;
  double planted_bonus = 2.0;
  double noise = 0.5;
};

// ESConv-style JSON array.
std::string synthetic_corpus(const CorpusSpec& spec);

// The corpus for the planted-advantage experiment: a common strategy with
// probability 0.35, `planted` with 0.12, and feedback driven by `planted`.
CorpusSpec planted_spec(std::size_t dialogues, std::uint64_t seed,
                        Strategy planted = Strategy::kSelfDisclosure);

// Parses, splits (8:1:1) and resolves a generated corpus into records.
dataset::Records synthetic_records(const std::string& corpus_json, const lexicon::VadLexicon& lex,
                                   int plan_length, std::uint64_t split_seed = 13);

}  // namespace multiesc::testing
