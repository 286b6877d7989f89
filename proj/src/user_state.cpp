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

#include "multiesc/user_state.hpp"

#include <cmath>

#include "multiesc/error.hpp"

namespace multiesc::user_state {

UserState build_user_state(const Tokens& system_text, const Tokens& user_text,
                           const std::optional<Tokens>& cause, const lexicon::VadLexicon& lex,
                           OovMode oov) {
  const auto layout = layout_for(lex);
  const int cells = lex.config().num_cells();
  UserState state;
  state.vector.assign(static_cast<std::size_t>(layout.dimension()), 0.0);
  auto& vec = state.vector;

  std::size_t count = 0, covered = 0;
  double sum_v = 0.0, sum_a = 0.0;
  auto visit = [&](const Tokens& tokens) {
    for (const auto& tok : tokens) {
      ++count;
      if (const auto score = lex.find(tok)) {
        ++covered;
        sum_v += score->valence;
        sum_a += score->arousal;
        vec[static_cast<std::size_t>(lexicon::quantize(score->valence, score->arousal,
                                                       lex.config().n_valence,
                                                       lex.config().n_arousal))] += 1.0;
      } else if (oov == OovMode::kSpecialBin) {
        vec[static_cast<std::size_t>(lex.config().special_id())] += 1.0;
      } else {
        for (int c = 0; c < cells; ++c) vec[static_cast<std::size_t>(c)] += 1.0 / cells;
      }
    }
  };
  visit(system_text);
  visit(user_text);
  if (cause) visit(*cause);

  if (count > 0) {
    for (int i = 0; i < layout.num_emotions; ++i) vec[static_cast<std::size_t>(i)] /= static_cast<double>(count);
  }
  vec[static_cast<std::size_t>(layout.log_count())] = std::log1p(static_cast<double>(count));
  vec[static_cast<std::size_t>(layout.coverage())] =
      count ? static_cast<double>(covered) / static_cast<double>(count) : 0.0;
  if (covered) {
    vec[static_cast<std::size_t>(layout.mean_valence())] = sum_v / static_cast<double>(covered);
    vec[static_cast<std::size_t>(layout.mean_arousal())] = sum_a / static_cast<double>(covered);
  }
  return state;
}

UserStateSequence build_sequence(const corpus::Dialogue& dialogue, int t,
                                 const lexicon::VadLexicon& lex, OovMode oov) {
  const auto rs = corpus::rounds(dialogue);
  if (t < 1 || t > static_cast<int>(rs.size()) + 1) {
    throw Error("user_state", "RoundOutOfRange",
                "round " + std::to_string(t) + " outside 1.." + std::to_string(rs.size() + 1));
  }
  static const Tokens kEmpty;
  UserStateSequence seq;
  for (int r = 1; r < t; ++r) {
    const auto& round = rs[static_cast<std::size_t>(r - 1)];
    const auto& x = round.supporter ? dialogue.turns[*round.supporter].text : kEmpty;
    const auto& y = round.seeker ? dialogue.turns[*round.seeker].text : kEmpty;
    std::optional<Tokens> cause;
    if (round.seeker && dialogue.turns[*round.seeker].cause_span) {
      cause = dialogue.turns[*round.seeker].cause_span;
    } else if (round.supporter && dialogue.turns[*round.supporter].cause_span) {
      cause = dialogue.turns[*round.supporter].cause_span;
    }
    auto state = build_user_state(x, y, cause, lex, oov);
    state.round_index = r;
    seq.states.push_back(std::move(state));
  }
  return seq;
}

}  // namespace multiesc::user_state
