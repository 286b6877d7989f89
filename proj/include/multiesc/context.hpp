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

#include <vector>

#include "multiesc/strategy.hpp"
#include "multiesc/text.hpp"

namespace multiesc {

using StateVector = std::vector<double>;

// Everything a sequence model may condition on at round t.
struct PlanContext {
  std::vector<int> history;            // strategy ids of rounds 1..t-1, Other included
  Tokens window;                       // dialogue text before x_t, most recent last
  std::vector<int> window_emotions;    // one emotion id per window token
  std::vector<StateVector> user_states;  // u_1..u_{t-1}
  int round = 1;
  int num_rounds = 0;                  // 0 when the dialogue length is unknown
};

}  // namespace multiesc
