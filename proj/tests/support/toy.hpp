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

#include <memory>

#include "multiesc/feedback.hpp"
#include "multiesc/rng.hpp"
#include "multiesc/seqmodel.hpp"

// Hand-built planning scenarios with known answers.
namespace multiesc::testing {

// Two live strategies A (Question) and B (Restatement): Pr(A)=0.7,
// Pr(B)=0.3; from A the next step is A/B at 0.5/0.5, from B at 0.2/0.8.
std::unique_ptr<ssg::TableModel> flip_ssg();
// f(AA)=2, f(AB)=3, f(BA)=4, f(BB)=5; 1 for every other sequence.
std::unique_ptr<ufp::TableUfp> flip_ufp();

// After any candidate: first future step A 0.6 / B 0.4, then C|A = D|A = 0.5
// and C|B = 0.9, D|B = 0.1 (A..D are the first four strategy ids).
std::unique_ptr<ssg::TableModel> greedy_trap_ssg();

// Random distribution with occasional exact zeros and repeated values.
ssg::StrategyDist random_dist(Rng& rng);

// Table over every prefix up to `max_prefix` strategies.
std::unique_ptr<ssg::TableModel> random_table(Rng& rng, int max_prefix);

}  // namespace multiesc::testing
