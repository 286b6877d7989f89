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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "multiesc/text.hpp"

namespace multiesc::lexicon {

struct VadScore {
  double valence = 0.0;
  double arousal = 0.0;
  double dominance = 0.0;
};

struct QuantizerConfig {
  int n_valence = 8;
  int n_arousal = 8;

  int num_cells() const { return n_valence * n_arousal; }
  // Cells plus the out-of-lexicon id.
  int num_emotions() const { return num_cells() + 1; }
  int special_id() const { return num_cells(); }
};

using EmotionId = int;

// Cell id = a_idx * n_V + v_idx with floor quantization; 1.0 clamps into the
// last interval. Dominance plays no part. Errors: lexicon.OutOfRange.
EmotionId quantize(double valence, double arousal, int n_valence, int n_arousal);

class VadLexicon {
 public:
  VadLexicon() = default;
  VadLexicon(std::unordered_map<std::string, VadScore> entries, QuantizerConfig config);

  const QuantizerConfig& config() const { return config_; }
  std::size_t size() const { return entries_.size(); }

  // Case-insensitive.
  std::optional<VadScore> find(std::string_view word) const;

  EmotionId emotion_id(std::string_view word) const;

  const std::unordered_map<std::string, VadScore>& entries() const { return entries_; }

 private:
  std::unordered_map<std::string, VadScore> entries_;
  QuantizerConfig config_;
};

// Tab-separated rows `word<TAB>V<TAB>A<TAB>D`. A non-numeric first line is
// taken as a header; blank lines are skipped.
// Errors: lexicon.MalformedRow, lexicon.ScoreOutOfRange, lexicon.BadConfig.
VadLexicon load_vad(std::string_view tsv, int n_valence = 8, int n_arousal = 8);

// One id per token; out-of-lexicon tokens get config().special_id().
std::vector<EmotionId> emotion_ids(const Tokens& tokens, const VadLexicon& lexicon);

}  // namespace multiesc::lexicon
