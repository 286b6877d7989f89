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
#include <string_view>

namespace multiesc {

// The action alphabet. Ids 0..6 are planable; Other is kept only as a history
// token and is never a planning target.
enum class Strategy : std::uint8_t {
  kQuestion = 0,
  kRestatementOrParaphrasing = 1,
  kReflectionOfFeelings = 2,
  kSelfDisclosure = 3,
  kAffirmationAndReassurance = 4,
  kProvidingSuggestionsOrInformation = 5,
  kGreetings = 6,
  kOther = 7,
};

inline constexpr int kNumPlanable = 7;
inline constexpr int kNumStrategies = 8;

constexpr int to_id(Strategy s) { return static_cast<int>(s); }
constexpr bool is_planable(Strategy s) { return to_id(s) < kNumPlanable; }

// Throws Error("corpus", "UnknownStrategyId") outside 0..7.
Strategy strategy_from_id(int id);

std::string_view strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(std::string_view name);

inline constexpr std::array<Strategy, kNumPlanable> kPlanableStrategies = {
    Strategy::kQuestion,
    Strategy::kRestatementOrParaphrasing,
    Strategy::kReflectionOfFeelings,
    Strategy::kSelfDisclosure,
    Strategy::kAffirmationAndReassurance,
    Strategy::kProvidingSuggestionsOrInformation,
    Strategy::kGreetings,
};

}  // namespace multiesc
