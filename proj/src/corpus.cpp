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

#include "multiesc/corpus.hpp"

#include <algorithm>
#include <regex>

#include "json.hpp"
#include "multiesc/error.hpp"
#include "multiesc/rng.hpp"

namespace multiesc::corpus {

namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& msg) { throw Error("corpus", "SchemaViolation", msg); }

std::optional<int> parse_feedback(const json& v, const std::string& where) {
  if (v.is_null()) return std::nullopt;
  int value = 0;
  if (v.is_number_integer()) {
    value = v.get<int>();
  } else if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.empty()) return std::nullopt;
    try {
      std::size_t used = 0;
      value = std::stoi(s, &used);
      if (used != s.size()) schema(where + ": feedback '" + s + "' is not an integer");
    } catch (const std::logic_error&) {
      schema(where + ": feedback '" + s + "' is not an integer");
    }
  } else {
    schema(where + ": feedback must be an integer or string");
  }
  if (value < 1 || value > 5) schema(where + ": feedback " + std::to_string(value) + " outside 1..5");
  return value;
}

Speaker parse_speaker(const std::string& s, const std::string& where) {
  const auto lower = to_lower(s);
  if (lower == "seeker" || lower == "usr" || lower == "user") return Speaker::kSeeker;
  if (lower == "supporter" || lower == "sys" || lower == "system") return Speaker::kSupporter;
  schema(where + ": unknown speaker '" + s + "'");
}

struct RawTurn {
  Turn turn;
  std::vector<Strategy> utterance_strategies;
};

Dialogue parse_dialogue(const json& obj, std::size_t index) {
  const std::string where = "dialogue " + std::to_string(index);
  if (!obj.is_object()) schema(where + ": expected an object");
  auto dialog_it = obj.find("dialog");
  if (dialog_it == obj.end() || !dialog_it->is_array()) schema(where + ": missing 'dialog' array");
  if (dialog_it->empty()) schema(where + ": 'dialog' is empty");

  Dialogue d;
  if (auto id = obj.find("id"); id != obj.end()) {
    d.id = id->is_string() ? id->get<std::string>() : id->dump();
  } else {
    d.id = "dlg-" + std::to_string(index);
  }

  std::vector<Turn> raw;
  std::size_t t = 0;
  for (const auto& entry : *dialog_it) {
    const std::string at = where + " turn " + std::to_string(t++);
    if (!entry.is_object()) schema(at + ": expected an object");
    auto sp = entry.find("speaker");
    auto content = entry.find("content");
    if (sp == entry.end() || !sp->is_string()) schema(at + ": missing 'speaker'");
    if (content == entry.end() || !content->is_string()) schema(at + ": missing 'content'");

    Turn turn;
    turn.speaker = parse_speaker(sp->get<std::string>(), at);
    turn.text = tokenize(content->get<std::string>());

    const json* annotation = nullptr;
    if (auto a = entry.find("annotation"); a != entry.end() && a->is_object()) annotation = &*a;
    auto field = [&](const char* key) -> const json* {
      if (annotation) {
        if (auto f = annotation->find(key); f != annotation->end()) return &*f;
      }
      if (auto f = entry.find(key); f != entry.end()) return &*f;
      return nullptr;
    };
    if (const json* s = field("strategy"); s && s->is_string()) {
      turn.raw_strategy = s->get<std::string>();
    }
    if (const json* f = field("feedback")) turn.feedback = parse_feedback(*f, at);
    if (const json* c = field("cause")) {
      if (c->is_string() && !c->get<std::string>().empty()) {
        turn.cause_span = tokenize(c->get<std::string>());
      }
    }
    raw.push_back(std::move(turn));
  }

  // Feedback on a supporter turn belongs to the seeker reply after it.
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].speaker != Speaker::kSupporter || !raw[i].feedback) continue;
    std::optional<std::size_t> target;
    for (std::size_t j = i + 1; j < raw.size() && !target; ++j) {
      if (raw[j].speaker == Speaker::kSeeker) target = j;
    }
    for (std::size_t j = i; j-- > 0 && !target;) {
      if (raw[j].speaker == Speaker::kSeeker) target = j;
    }
    if (target && !raw[*target].feedback) raw[*target].feedback = raw[i].feedback;
    raw[i].feedback.reset();
  }

  for (auto& turn : raw) {
    std::vector<Strategy> utterance;
    if (turn.speaker == Speaker::kSupporter) {
      turn.strategy = adapt_strategy(turn.raw_strategy, turn.text);
      utterance.push_back(*turn.strategy);
    } else {
      turn.raw_strategy.reset();
    }
    if (!d.turns.empty() && d.turns.back().speaker == turn.speaker) {
      Turn& prev = d.turns.back();
      prev.text.insert(prev.text.end(), turn.text.begin(), turn.text.end());
      if (turn.raw_strategy) {
        prev.raw_strategy = turn.raw_strategy;
        prev.strategy = turn.strategy;
      }
      if (turn.feedback) prev.feedback = turn.feedback;
      if (turn.cause_span) {
        if (!prev.cause_span) prev.cause_span.emplace();
        prev.cause_span->insert(prev.cause_span->end(), turn.cause_span->begin(),
                                turn.cause_span->end());
      }
      prev.utterance_strategies.insert(prev.utterance_strategies.end(), utterance.begin(),
                                       utterance.end());
    } else {
      turn.utterance_strategies = std::move(utterance);
      d.turns.push_back(std::move(turn));
    }
  }
  return d;
}

std::optional<Strategy> label_to_strategy(const std::string& raw) {
  const auto lower = to_lower(raw);
  if (lower == "question") return Strategy::kQuestion;
  if (lower == "restatement or paraphrasing") return Strategy::kRestatementOrParaphrasing;
  if (lower == "reflection of feelings") return Strategy::kReflectionOfFeelings;
  if (lower == "self-disclosure") return Strategy::kSelfDisclosure;
  if (lower == "affirmation and reassurance") return Strategy::kAffirmationAndReassurance;
  if (lower == "providing suggestions" || lower == "information") {
    return Strategy::kProvidingSuggestionsOrInformation;
  }
  return std::nullopt;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

bool is_greeting(const Tokens& text) {
  static const std::regex kPattern(
      "(^| )(hello|hi|hey|good (morning|afternoon|evening)|how are you|nice to meet)( |$)",
      std::regex::ECMAScript | std::regex::icase);
  Tokens head(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(6, text.size())));
  return std::regex_search(to_lower(join(head)), kPattern);
}

Strategy adapt_strategy(const std::optional<std::string>& raw, const Tokens& text) {
  if (!raw) return Strategy::kOther;
  const auto label = trim(*raw);
  if (auto s = label_to_strategy(label)) return *s;
  if (to_lower(label) == "others") return is_greeting(text) ? Strategy::kGreetings : Strategy::kOther;
  throw Error("corpus", "UnknownLabel", "strategy label '" + *raw + "'");
}

std::vector<Dialogue> parse_esconv(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw Error("corpus", "MalformedJson",
                "syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_array()) schema("top level must be an array of dialogues");
  if (doc.empty()) throw Error("corpus", "EmptyCorpus", "no dialogues in input");
  std::vector<Dialogue> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(parse_dialogue(doc[i], i));
  return out;
}

std::vector<Round> rounds(const Dialogue& dialogue) {
  std::vector<Round> out;
  for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
    if (dialogue.turns[i].speaker == Speaker::kSupporter) {
      out.push_back({i, std::nullopt});
    } else if (!out.empty() && out.back().supporter && !out.back().seeker) {
      out.back().seeker = i;
    } else {
      out.push_back({std::nullopt, i});
    }
  }
  return out;
}

Splits split_corpus(std::size_t num_dialogues, std::uint64_t seed) {
  if (num_dialogues < 10) {
    throw Error("corpus", "TooFewDialogues",
                "need at least 10 dialogues, got " + std::to_string(num_dialogues));
  }
  std::vector<std::size_t> order(num_dialogues);
  for (std::size_t i = 0; i < num_dialogues; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const std::size_t n_held = num_dialogues / 10;
  const std::size_t n_train = num_dialogues - 2 * n_held;
  Splits s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                      order.begin() + static_cast<std::ptrdiff_t>(n_train + n_held));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_held), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<PlanningExample> make_planning_examples(const Dialogue& dialogue, int max_len,
                                                    std::size_t window) {
  if (max_len < 1) throw Error("corpus", "BadConfig", "plan length must be >= 1");
  const auto rs = rounds(dialogue);

  // (round number, strategy) for every planable supporter turn.
  std::vector<std::pair<int, Strategy>> planable;
  for (std::size_t r = 0; r < rs.size(); ++r) {
    if (!rs[r].supporter) continue;
    const auto s = *dialogue.turns[*rs[r].supporter].strategy;
    if (is_planable(s)) planable.emplace_back(static_cast<int>(r) + 1, s);
  }

  std::vector<PlanningExample> out;
  std::size_t next = 0;
  for (std::size_t r = 0; r < rs.size(); ++r) {
    if (!rs[r].supporter) continue;
    const std::size_t turn_index = *rs[r].supporter;
    const int round = static_cast<int>(r) + 1;
    if (!is_planable(*dialogue.turns[turn_index].strategy)) continue;
    while (planable[next].first != round) ++next;

    PlanningExample ex;
    ex.dialogue_id = dialogue.id;
    ex.round = round;
    ex.num_rounds = static_cast<int>(rs.size());
    for (std::size_t p = 0; p < r; ++p) {
      if (rs[p].supporter) ex.history.push_back(to_id(*dialogue.turns[*rs[p].supporter].strategy));
    }
    for (int u = 1; u < round; ++u) ex.user_states.push_back(u);

    Tokens before;
    for (std::size_t i = 0; i < turn_index; ++i) {
      const auto& text = dialogue.turns[i].text;
      before.insert(before.end(), text.begin(), text.end());
    }
    const std::size_t keep = std::min(window, before.size());
    ex.window.assign(before.end() - static_cast<std::ptrdiff_t>(keep), before.end());

    for (std::size_t j = next; j < planable.size() && ex.target.size() < static_cast<std::size_t>(max_len); ++j) {
      ex.target.push_back(planable[j].second);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<FeedbackExample> make_feedback_examples(const Dialogue& dialogue, int max_len) {
  if (max_len < 1) throw Error("corpus", "BadConfig", "plan length must be >= 1");
  const auto rs = rounds(dialogue);
  std::vector<FeedbackExample> out;
  std::vector<std::pair<int, Strategy>> planable;
  for (std::size_t r = 0; r < rs.size(); ++r) {
    const int round = static_cast<int>(r) + 1;
    if (rs[r].supporter) {
      const auto s = *dialogue.turns[*rs[r].supporter].strategy;
      if (is_planable(s)) planable.emplace_back(round, s);
    }
    if (!rs[r].seeker) continue;
    const auto& seeker = dialogue.turns[*rs[r].seeker];
    if (!seeker.feedback || planable.empty()) continue;

    const std::size_t n = std::min(planable.size(), static_cast<std::size_t>(max_len));
    FeedbackExample ex;
    ex.dialogue_id = dialogue.id;
    ex.round = round;
    for (std::size_t j = planable.size() - n; j < planable.size(); ++j) {
      ex.strategy_sequence.push_back(planable[j].second);
    }
    const int first = planable[planable.size() - n].first;
    for (int u = 1; u < first; ++u) ex.user_states.push_back(u);
    ex.score = *seeker.feedback;
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace multiesc::corpus
