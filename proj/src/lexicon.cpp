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

#include "multiesc/lexicon.hpp"

#include <charconv>
#include <cmath>

#include "multiesc/error.hpp"

namespace multiesc::lexicon {

namespace {

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

EmotionId quantize(double valence, double arousal, int n_valence, int n_arousal) {
  if (n_valence < 1 || n_arousal < 1) {
    throw Error("lexicon", "BadConfig", "interval counts must be >= 1");
  }
  if (!in_unit(valence) || !in_unit(arousal)) {
    throw Error("lexicon", "OutOfRange", "valence/arousal must lie in [0,1]");
  }
  const int v_idx = std::min(static_cast<int>(std::floor(valence * n_valence)), n_valence - 1);
  const int a_idx = std::min(static_cast<int>(std::floor(arousal * n_arousal)), n_arousal - 1);
  return a_idx * n_valence + v_idx;
}

VadLexicon::VadLexicon(std::unordered_map<std::string, VadScore> entries, QuantizerConfig config)
    : entries_(std::move(entries)), config_(config) {}

std::optional<VadScore> VadLexicon::find(std::string_view word) const {
  auto it = entries_.find(to_lower(word));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

EmotionId VadLexicon::emotion_id(std::string_view word) const {
  const auto score = find(word);
  if (!score) return config_.special_id();
  return quantize(score->valence, score->arousal, config_.n_valence, config_.n_arousal);
}

VadLexicon load_vad(std::string_view tsv, int n_valence, int n_arousal) {
  if (n_valence < 1 || n_arousal < 1) {
    throw Error("lexicon", "BadConfig", "interval counts must be >= 1");
  }
  std::unordered_map<std::string, VadScore> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= tsv.size()) {
    const auto end = tsv.find('\n', pos);
    std::string_view line = tsv.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? tsv.size() + 1 : end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const auto fields = split_tabs(line);
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != 4) {
      throw Error("lexicon", "MalformedRow", where + ": expected 4 tab-separated fields");
    }
    double v, a, d;
    const bool numeric = parse_double(fields[1], v) && parse_double(fields[2], a) &&
                         parse_double(fields[3], d);
    if (!numeric) {
      if (line_no == 1) continue;  // header
      throw Error("lexicon", "MalformedRow", where + ": non-numeric score");
    }
    if (fields[0].empty()) throw Error("lexicon", "MalformedRow", where + ": empty word");
    if (!in_unit(v) || !in_unit(a) || !in_unit(d)) {
      throw Error("lexicon", "ScoreOutOfRange", where + ": scores must lie in [0,1]");
    }
    entries[to_lower(fields[0])] = VadScore{v, a, d};
  }
  return VadLexicon(std::move(entries), QuantizerConfig{n_valence, n_arousal});
}

std::vector<EmotionId> emotion_ids(const Tokens& tokens, const VadLexicon& lexicon) {
  std::vector<EmotionId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lexicon.emotion_id(t));
  return out;
}

}  // namespace multiesc::lexicon
