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

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "multiesc/eval.hpp"
#include "multiesc/matrix.hpp"
#include "multiesc/planner.hpp"
#include "multiesc/rng.hpp"
#include "multiesc/seqmodel.hpp"

namespace {

using multiesc::Rng;
using multiesc::nn::Matrix;

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_GemmSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Matrix a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  Matrix out(n, n);
  for (auto _ : state) {
    multiesc::nn::kernels::gemm_serial(a, false, b, false, out, false);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

void BM_GemmParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Matrix a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  Matrix out(n, n);
  for (auto _ : state) {
    multiesc::nn::kernels::gemm_parallel(a, false, b, false, out, false);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

BENCHMARK(BM_GemmSerial)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_GemmParallel)->Arg(64)->Arg(128)->Arg(256);

struct PlanningFixture {
  multiesc::ssg::NeuralSsgConfig config;
  std::unique_ptr<multiesc::ssg::NeuralSsg> ssg;
  multiesc::ufp::TableUfp ufp{8, 3.0};
  std::vector<multiesc::ssg::TrainingExample> test;

  PlanningFixture() {
    config.d_emb = 32;
    config.heads = 2;
    config.d_ff = 64;
    config.state_dim = 8;
    config.num_emotions = 4;
    ssg = std::make_unique<multiesc::ssg::NeuralSsg>(config);
    Rng rng(7);
    for (int i = 0; i < 16; ++i) {
      multiesc::ssg::TrainingExample ex;
      for (int r = 0; r < 4; ++r) {
        ex.context.history.push_back(static_cast<int>(rng.index(7)));
        multiesc::StateVector u(8);
        for (auto& x : u) x = rng.uniform();
        ex.context.user_states.push_back(std::move(u));
      }
      ex.context.window = {"i", "feel", "so", "tired", "of", "work"};
      ex.target = {static_cast<multiesc::Strategy>(rng.index(7))};
      test.push_back(std::move(ex));
    }
  }
};

PlanningFixture& fixture() {
  static PlanningFixture f;
  return f;
}

void BM_SelectStrategy(benchmark::State& state) {
  auto& f = fixture();
  const auto execution = state.range(0) ? multiesc::planner::Execution::kParallel
                                        : multiesc::planner::Execution::kSerial;
  multiesc::planner::PlannerConfig config;
  config.plan_length = 3;
  for (auto _ : state) {
    auto plan = multiesc::planner::select_strategy(*f.ssg, f.ufp, f.test.front().context, config, execution);
    benchmark::DoNotOptimize(plan.chosen);
  }
}

void BM_RunEval(benchmark::State& state) {
  auto& f = fixture();
  multiesc::eval::EvalOptions options;
  options.execution = state.range(0) ? multiesc::planner::Execution::kParallel
                                     : multiesc::planner::Execution::kSerial;
  const multiesc::planner::PlannerConfig config;
  for (auto _ : state) {
    auto m = multiesc::eval::run_eval(*f.ssg, f.ufp, f.test, config, options);
    benchmark::DoNotOptimize(m.accuracy);
  }
}

BENCHMARK(BM_SelectStrategy)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunEval)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
