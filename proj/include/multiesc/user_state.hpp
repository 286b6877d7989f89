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

#include <optional>
#include <vector>

#include "multiesc/corpus.hpp"
#include "multiesc/lexicon.hpp"

namespace multiesc::user_state {

// How out-of-lexicon tokens enter the histogram: their own bin, or spread
// evenly over every lexicon cell.
enum class OovMode { kSpecialBin, kAverage };

struct UserState {
  std::vector<double> vector;
  int round_index = 0;
};

struct UserStateSequence {
  std::vector<UserState> states;
};

// Auxiliary features appended after the emotion histogram.
inline constexpr int kNumAuxFeatures = 4;

// Index layout of the reference featurization.
struct FeatureLayout {
  int num_emotions;
  int dimension() const { return num_emotions + kNumAuxFeatures; }
  int log_count() const { return num_emotions; }
  int coverage() const { return num_emotions + 1; }
  int mean_valence() const { return num_emotions + 2; }
  int mean_arousal() const { return num_emotions + 3; }
};

inline FeatureLayout layout_for(const lexicon::VadLexicon& lex) {
  return FeatureLayout{lex.config().num_emotions()};
}

// Normalized emotion histogram over x ⊕ y ⊕ c, then log(1 + token count),
// lexicon coverage, and mean valence/arousal of covered tokens.
UserState build_user_state(const Tokens& system_text, const Tokens& user_text,
                           const std::optional<Tokens>& cause, const lexicon::VadLexicon& lex,
                           OovMode oov = OovMode::kSpecialBin);

// States for rounds 1..t-1. Errors: user_state.RoundOutOfRange.
UserStateSequence build_sequence(const corpus::Dialogue& dialogue, int t,
                                 const lexicon::VadLexicon& lex,
                                 OovMode oov = OovMode::kSpecialBin);

}  // namespace multiesc::user_state
