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

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "check.hpp"
#include "multiesc/seqmodel.hpp"
#include "synthetic.hpp"

using namespace multiesc;
using namespace multiesc::ssg;
using multiesc::testing::error_code;

namespace {

constexpr Strategy A = Strategy::kQuestion;
constexpr Strategy B = Strategy::kRestatementOrParaphrasing;
constexpr Strategy C = Strategy::kReflectionOfFeelings;

std::size_t idx(Strategy s) { return static_cast<std::size_t>(to_id(s)); }

TrainingExample transition(Strategy from, Strategy to) {
  TrainingExample ex;
  ex.context.history = {to_id(from)};
  ex.target = {to};
  return ex;
}

MarkovConfig plain(int order, double alpha) {
  MarkovConfig c;
  c.order = order;
  c.alpha = alpha;
  c.use_stage = false;
  c.use_emotion = false;
  return c;
}

PlanContext after(Strategy s) {
  PlanContext ctx;
  ctx.history = {to_id(s)};
  return ctx;
}

void check_valid(const StrategyDist& d) {
  double total = 0.0;
  for (double p : d) {
    CHECK(p >= 0.0);
    total += p;
  }
  CHECK(std::abs(total - 1.0) < 1e-9);
}

PlanContext random_context(Rng& rng, std::size_t state_dim, std::size_t num_emotions) {
  PlanContext ctx;
  const auto h = rng.index(6);
  for (std::size_t i = 0; i < h; ++i) ctx.history.push_back(static_cast<int>(rng.index(8)));
  const char* words[] = {"sad", "work", "lost", "i", "feel", "friend", "exam"};
  for (std::size_t i = 0; i < rng.index(10); ++i) {
    ctx.window.push_back(words[rng.index(7)]);
    ctx.window_emotions.push_back(static_cast<int>(rng.index(num_emotions)));
  }
  for (std::size_t i = 0; i < h; ++i) {
    StateVector u(state_dim);
    for (auto& x : u) x = rng.uniform();
    ctx.user_states.push_back(u);
  }
  ctx.round = static_cast<int>(h) + 1;
  ctx.num_rounds = ctx.round + static_cast<int>(rng.index(6));
  return ctx;
}

std::vector<Strategy> random_prefix(Rng& rng, std::size_t max_len) {
  std::vector<Strategy> p;
  for (std::size_t i = 0; i < rng.index(max_len); ++i) p.push_back(static_cast<Strategy>(rng.index(7)));
  return p;
}

NeuralSsgConfig small_neural(std::size_t state_dim = 8, std::size_t num_emotions = 4) {
  NeuralSsgConfig c;
  c.d_emb = 16;
  c.heads = 2;
  c.layers = 1;
  c.d_ff = 32;
  c.vocab_buckets = 64;
  c.num_emotions = num_emotions;
  c.state_dim = state_dim;
  c.window = 16;
  c.max_plan_length = 4;
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("seqmodel");

TEST_CASE("untrained Markov model is uniform") {
  MarkovModel m(plain(1, 0.5));
  for (double p : m.next_dist(after(A), {})) CHECK(p == doctest::Approx(1.0 / 7).epsilon(1e-15));
  for (double p : uniform_dist()) CHECK(p == 1.0 / 7);
}

TEST_CASE("Markov counts and add-alpha smoothing") {
  const std::vector<TrainingExample> data = {transition(A, B), transition(A, B), transition(A, C)};
  const auto exact = train_markov(data, plain(1, 0.0));
  const auto d = exact->next_dist(after(A), {});
  CHECK(d[idx(B)] == 2.0 / 3.0);
  CHECK(d[idx(C)] == 1.0 / 3.0);
  CHECK(d[idx(A)] == 0.0);

  const auto smooth = train_markov(data, plain(1, 1.0));
  const auto s = smooth->next_dist(after(A), {});
  CHECK(s[idx(B)] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(s[idx(C)] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(s[idx(A)] == doctest::Approx(0.1).epsilon(1e-15));

  const auto huge = train_markov(data, plain(1, 1e9));
  for (double p : huge->next_dist(after(A), {})) CHECK(std::abs(p - 1.0 / 7) < 1e-6);

  const std::vector<TrainingExample> one = {transition(A, B)};
  CHECK(train_markov(one, plain(1, 0.0))->next_dist(after(A), {})[idx(B)] == 1.0);
}

TEST_CASE("order 0 gives marginal frequencies") {
  const std::vector<TrainingExample> data = {transition(A, B), transition(C, B), transition(B, A),
                                             transition(A, C)};
  const auto m = train_markov(data, plain(0, 0.0));
  for (Strategy ctx : {A, B, C}) {
    const auto d = m->next_dist(after(ctx), {});
    CHECK(d[idx(B)] == 0.5);
    CHECK(d[idx(A)] == 0.25);
    CHECK(d[idx(C)] == 0.25);
  }
}

TEST_CASE("Markov backs off only when a key was never observed") {
  const std::vector<TrainingExample> data = {transition(A, B), transition(C, A)};
  const auto m = train_markov(data, plain(1, 0.0));
  // Never saw history B: falls to the order-0 marginal.
  const auto d = m->next_dist(after(B), {});
  CHECK(d[idx(A)] == 0.5);
  CHECK(d[idx(B)] == 0.5);
  // The prefix extends the history.
  CHECK(m->next_dist(PlanContext{}, std::vector<Strategy>{C})[idx(A)] == 1.0);
}

TEST_CASE("Markov multi-target examples count each position") {
  TrainingExample ex;
  ex.context.history = {to_id(A)};
  ex.target = {B, C, B};
  const std::vector<TrainingExample> data = {ex};
  const auto m = train_markov(data, plain(1, 0.0));
  CHECK(m->next_dist(after(A), {})[idx(B)] == 1.0);
  CHECK(m->next_dist(after(B), {})[idx(C)] == 1.0);
  CHECK(m->next_dist(after(C), {})[idx(B)] == 1.0);
  CHECK(m->nll(data) == 0.0);
}

TEST_CASE("stage and emotion buckets") {
  CHECK(stage_bucket(1, 10) == 1);
  CHECK(stage_bucket(2, 10) == 1);
  CHECK(stage_bucket(3, 10) == 2);
  CHECK(stage_bucket(10, 10) == 5);
  CHECK(stage_bucket(12, 10) == 5);
  CHECK(stage_bucket(3, 0) == 0);
  StateVector u(69, 0.0);
  CHECK(emotion_bucket({}) == 0);
  CHECK(emotion_bucket({u}) == 0);
  u[66] = 1.0;
  u[67] = 0.1;
  CHECK(emotion_bucket({u}) == 1);
  u[67] = 0.5;
  CHECK(emotion_bucket({u}) == 2);
  u[67] = 1.0;
  CHECK(emotion_bucket({u}) == 3);
}

TEST_CASE("Markov training errors") {
  std::vector<TrainingExample> none;
  CHECK(error_code([&] { train_markov(none, plain(1, 0.1)); }) == "ssg.EmptyTraining");
  const std::vector<TrainingExample> one = {transition(A, B)};
  CHECK(error_code([&] { train_markov(one, plain(-1, 0.1)); }) == "ssg.BadConfig");
  CHECK(error_code([&] { train_markov(one, plain(1, -1.0)); }) == "ssg.BadConfig");
}

TEST_CASE("prefix validation") {
  MarkovModel m(plain(1, 0.1));
  const std::vector<Strategy> long_prefix(8, A);
  CHECK(error_code([&] { m.next_dist(PlanContext{}, long_prefix); }) == "ssg.PrefixTooLong");
  const std::vector<Strategy> other = {Strategy::kOther};
  CHECK(error_code([&] { m.next_dist(PlanContext{}, other); }) == "ssg.InvalidStrategy");
}

TEST_CASE("sequence_logprob hand cases and additivity") {
  MarkovModel uniform(plain(1, 0.1));
  CHECK(sequence_logprob(uniform, PlanContext{}, A, {}) == 0.0);
  const std::vector<Strategy> fb = {B};
  CHECK(sequence_logprob(uniform, PlanContext{}, A, fb) == doctest::Approx(std::log(1.0 / 7)));

  TableModel table(4, uniform_dist());
  StrategyDist half{};
  half[idx(B)] = 0.5;
  half[idx(C)] = 0.5;
  table.set({A}, half);
  CHECK(sequence_logprob(table, PlanContext{}, A, fb) == doctest::Approx(std::log(0.5)).epsilon(1e-15));

  testing::CorpusSpec spec;
  spec.dialogues = 30;
  const auto lex = lexicon::load_vad(testing::synthetic_lexicon(200, 1));
  const auto recs = testing::synthetic_records(testing::synthetic_corpus(spec), lex, 3);
  const auto train = dataset::planning_split(recs.planning, "train");
  MarkovConfig cfg;
  const auto m = train_markov(train, cfg);
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const auto& ctx = train[rng.index(train.size())].context;
    const auto first = static_cast<Strategy>(rng.index(7));
    const std::vector<Strategy> fut = {static_cast<Strategy>(rng.index(7)), static_cast<Strategy>(rng.index(7))};
    const double lp = sequence_logprob(*m, ctx, first, fut);
    const std::vector<Strategy> pre = {first, fut[0]};
    const double step = sequence_logprob(*m, ctx, first, std::span(fut).first(1)) +
                        std::log(m->next_dist(ctx, pre)[idx(fut[1])]);
    CHECK(lp == doctest::Approx(step).epsilon(1e-14));
    CHECK(lp <= 0.0);
  }
}

TEST_CASE("table model validates distributions") {
  TableModel t(3, uniform_dist());
  StrategyDist bad{};
  bad[0] = 0.5;
  CHECK(error_code([&] { t.set({A}, bad); }) == "ssg.BadDistribution");
  CHECK(t.next_dist(PlanContext{}, std::vector<Strategy>{C}) == uniform_dist());
}

TEST_CASE("distributions are valid for every backend on random inputs") {
  testing::CorpusSpec spec;
  spec.dialogues = 30;
  const auto lex = lexicon::load_vad(testing::synthetic_lexicon(200, 1));
  const auto recs = testing::synthetic_records(testing::synthetic_corpus(spec), lex, 3);
  const auto train = dataset::planning_split(recs.planning, "train");
  const auto markov = train_markov(train, MarkovConfig{});
  NeuralSsg neural(small_neural(recs.state_dim, lex.config().num_emotions()));
  Rng rng(10);
  for (int i = 0; i < 100; ++i) {
    const auto ctx = random_context(rng, recs.state_dim, 65);
    const auto prefix = random_prefix(rng, 4);
    check_valid(markov->next_dist(ctx, prefix));
    check_valid(neural.next_dist(ctx, prefix));
  }
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  testing::CorpusSpec spec;
  spec.dialogues = 30;
  const auto lex = lexicon::load_vad(testing::synthetic_lexicon(200, 1));
  const auto recs = testing::synthetic_records(testing::synthetic_corpus(spec), lex, 3);
  const auto train = dataset::planning_split(recs.planning, "train");
  std::vector<std::unique_ptr<SequenceModel>> models;
  models.push_back(train_markov(train, MarkovConfig{}));
  models.push_back(std::make_unique<NeuralSsg>(small_neural(recs.state_dim, 65)));
  auto table = std::make_unique<TableModel>(4, uniform_dist());
  StrategyDist d{};
  d[2] = 0.1 + 0.2;
  d[3] = 1.0 - (0.1 + 0.2);
  table->set({A, B}, d);
  models.push_back(std::move(table));

  Rng rng(11);
  for (const auto& m : models) {
    const auto blob = save(*m);
    const auto back = load(blob);
    CHECK(back->kind() == m->kind());
    CHECK(save(*back) == blob);
    Rng local(12);
    for (int i = 0; i < 100; ++i) {
      const auto ctx = random_context(local, recs.state_dim, 65);
      const auto prefix = random_prefix(local, 3);
      CHECK(back->next_dist(ctx, prefix) == m->next_dist(ctx, prefix));
    }
    CHECK(error_code([&] { load(blob.substr(0, blob.size() / 2)); }) == "ssg.Corrupt");
    auto j = nlohmann::json::parse(blob);
    j["version"] = 99;
    CHECK(error_code([&] { load(j.dump()); }) == "ssg.VersionMismatch");
  }
  CHECK(error_code([] { load("{}"); }) == "ssg.Corrupt");
}

TEST_CASE("neural SSG memorizes a repeated example") {
  TrainingExample ex;
  ex.context.history = {6, 0};
  ex.context.window = {"i", "feel", "sad"};
  ex.context.window_emotions = {1, 2, 3};
  ex.context.user_states = {StateVector(8, 0.2), StateVector(8, 0.4)};
  ex.context.round = 3;
  ex.context.num_rounds = 8;
  ex.target = {Strategy::kSelfDisclosure, Strategy::kQuestion, Strategy::kAffirmationAndReassurance};
  const std::vector<TrainingExample> data(4, ex);
  auto config = small_neural();
  config.lr = 1e-2;
  config.weight_decay = 0.0;
  TrainLog log;
  const auto m = train_neural_ssg(data, config, 200, &log);
  REQUIRE(log.epoch_loss.size() == 201);
  CHECK(log.epoch_loss.back() < 0.05);
  {
    nn::Tape tape;
    CHECK(m->loss(tape, ex).scalar() < 0.05);
  }
  CHECK(log.to_csv("nll").rfind("epoch,nll\n0,", 0) == 0);
}

TEST_CASE("neural SSG training loss mostly decreases on a synthetic corpus") {
  testing::CorpusSpec spec;
  spec.dialogues = 40;
  spec.seed = 5;
  const auto lex = lexicon::load_vad(testing::synthetic_lexicon(200, 1));
  const auto recs = testing::synthetic_records(testing::synthetic_corpus(spec), lex, 2);
  auto train = dataset::planning_split(recs.planning, "train");
  REQUIRE(train.size() >= 100);
  train.resize(100);
  auto config = small_neural(recs.state_dim, 65);
  config.lr = 3e-3;
  TrainLog log;
  train_neural_ssg(train, config, 20, &log);
  int ok = 0;
  for (std::size_t e = 1; e < log.epoch_loss.size(); ++e) {
    CHECK(std::isfinite(log.epoch_loss[e]));
    if (log.epoch_loss[e] <= log.epoch_loss[e - 1]) ++ok;
  }
  CHECK(ok >= static_cast<int>(0.8 * static_cast<double>(log.epoch_loss.size() - 1)));
  CHECK(std::abs(log.epoch_loss.front() - std::log(7.0)) < 0.3);

  const auto again = train_neural_ssg(train, config, 2);
  const auto twice = train_neural_ssg(train, config, 2);
  CHECK(save(*again) == save(*twice));
  std::vector<TrainingExample> none;
  CHECK(error_code([&] { train_neural_ssg(none, config, 1); }) == "ssg.EmptyTraining");
}

TEST_SUITE_END();
