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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "golden.hpp"
#include "gradcases.hpp"
#include "json.hpp"
#include "multiesc/corpus.hpp"
#include "multiesc/dataset.hpp"
#include "multiesc/eval.hpp"
#include "multiesc/lexicon.hpp"
#include "multiesc/planner.hpp"
#include "multiesc/rng.hpp"
#include "synthetic.hpp"
#include "toy.hpp"

using namespace multiesc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void fail(Outcome& o, const std::string& why) {
  if (o.pass) o.detail = why;
  o.pass = false;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, x);
  return buf;
}

Strategy random_strategy(Rng& rng) { return static_cast<Strategy>(rng.index(kNumPlanable)); }

// Scores for every sequence up to `max_len`, uniform in [1, 5].
std::unique_ptr<ufp::TableUfp> random_ufp(Rng& rng, int max_len) {
  auto u = std::make_unique<ufp::TableUfp>(max_len, 1.0 + 4.0 * rng.uniform());
  std::function<void(std::vector<Strategy>&)> fill = [&](std::vector<Strategy>& seq) {
    if (!seq.empty()) u->set(seq, 1.0 + 4.0 * rng.uniform());
    if (static_cast<int>(seq.size()) == max_len) return;
    for (Strategy s : kPlanableStrategies) {
      seq.push_back(s);
      fill(seq);
      seq.pop_back();
    }
  };
  std::vector<Strategy> seq;
  fill(seq);
  return u;
}

StateVector random_state(Rng& rng, std::size_t dim) {
  StateVector u(dim);
  for (auto& x : u) x = rng.uniform();
  if (rng.uniform() < 0.2) u[dim - 3] = 0.0;
  return u;
}

PlanContext random_context(Rng& rng, std::size_t dim) {
  PlanContext ctx;
  const auto n = rng.index(6);
  for (std::size_t i = 0; i < n; ++i) ctx.history.push_back(static_cast<int>(rng.index(kNumStrategies)));
  const auto states = rng.index(4);
  for (std::size_t i = 0; i < states; ++i) ctx.user_states.push_back(random_state(rng, dim));
  ctx.num_rounds = rng.uniform() < 0.2 ? 0 : 4 + static_cast<int>(rng.index(20));
  ctx.round = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(std::max(ctx.num_rounds, 1))));
  return ctx;
}

std::size_t first_argmax(const ssg::StrategyDist& d) {
  return static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
}

double mass(const std::vector<planner::BeamHypothesis>& hs) {
  double m = 0.0;
  for (const auto& h : hs) m += std::exp(h.logprob);
  return m;
}

// ---------------------------------------------------------------------------

Outcome beam_oracle_equivalence() {
  Outcome o;
  Rng rng(101);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int L = 2 + i % 2;
    const int k = L == 2 ? 7 : 49;
    const auto table = testing::random_table(rng, L - 1);
    const auto u = random_ufp(rng, L);
    for (Strategy cand : kPlanableStrategies) {
      auto beam = planner::beam_topk_futures(*table, PlanContext{}, cand, L, k);
      auto exact = planner::exact_topk_futures(*table, PlanContext{}, cand, L, k);
      const double hb = planner::lookahead_score(*u, beam, cand, {}, false);
      const double he = planner::lookahead_score(*u, exact, cand, {}, false);
      worst = std::max(worst, std::abs(hb - he));
      auto by_future = [](const planner::BeamHypothesis& a, const planner::BeamHypothesis& b) {
        return a.future < b.future;
      };
      std::sort(beam.begin(), beam.end(), by_future);
      std::sort(exact.begin(), exact.end(), by_future);
      bool same = beam.size() == exact.size();
      for (std::size_t j = 0; same && j < beam.size(); ++j) same = beam[j].future == exact[j].future;
      if (!same) fail(o, "future sets differ at table " + std::to_string(i));
      if (std::abs(hb - he) >= 1e-12) fail(o, "h differs by " + fmt("%.3g", std::abs(hb - he)));
    }
  }
  const double t = seconds_since(t0);
  if (t >= 10.0) fail(o, "took " + fmt("%.2f", t) + " s");
  if (o.pass) o.detail = "200 tables x 7 candidates, max |dh| " + fmt("%.2g", worst);
  return o;
}

Outcome lookahead_flip() {
  Outcome o;
  const auto ssg = testing::flip_ssg();
  const auto u = testing::flip_ufp();
  const double gA = std::log(0.7), gB = std::log(0.3);
  const double hA = 0.5 * 2 + 0.5 * 3, hB = 0.2 * 4 + 0.8 * 5;
  std::string chosen;
  for (double lambda : {0.0, 0.3, 1.0}) {
    planner::PlannerConfig c;
    c.lambda = lambda;
    c.plan_length = 2;
    c.beam_size = 2;
    const auto plan = planner::select_strategy(*ssg, *u, PlanContext{}, c);
    const Strategy expect = lambda < 1.0 ? Strategy::kQuestion : Strategy::kRestatementOrParaphrasing;
    if (plan.chosen != expect) fail(o, "wrong strategy at lambda " + fmt("%.1f", lambda));
    const auto& a = plan.scores[0];
    const auto& b = plan.scores[1];
    const double want[] = {gA, hA, gA + lambda * hA, gB, hB, gB + lambda * hB};
    const double got[] = {a.g, a.h, a.f, b.g, b.h, b.f};
    for (int j = 0; j < 6; ++j) {
      if (!(std::abs(want[j] - got[j]) < 1e-9)) fail(o, "score mismatch at lambda " + fmt("%.1f", lambda));
    }
    chosen += std::string(chosen.empty() ? "" : "/") + (plan.chosen == Strategy::kQuestion ? "A" : "B");
  }
  if (o.pass) o.detail = "lambda 0/0.3/1.0 -> " + chosen + ", F(B) at 1.0 = " + fmt("%.4f", gB + hB);
  return o;
}

Outcome lambda_zero_reduction() {
  Outcome o;
  Rng rng(303);
  const std::size_t dim = 12;
  int contexts = 0;
  for (int m = 0; m < 50; ++m) {
    std::vector<ssg::TrainingExample> examples(20 + rng.index(60));
    for (auto& ex : examples) {
      ex.context = random_context(rng, dim);
      ex.target.resize(1 + rng.index(2));
      for (auto& s : ex.target) s = random_strategy(rng);
    }
    ssg::MarkovConfig mc;
    mc.order = static_cast<int>(rng.index(3));
    mc.alpha = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    mc.use_stage = rng.uniform() < 0.7;
    mc.use_emotion = rng.uniform() < 0.7;
    const auto model = ssg::train_markov(examples, mc);
    const auto u = random_ufp(rng, 2);
    for (int i = 0; i < 20; ++i, ++contexts) {
      const auto ctx = random_context(rng, dim);
      planner::PlannerConfig c;
      c.lambda = 0.0;
      c.beam_size = 1 + static_cast<int>(rng.index(7));
      const auto plan = planner::select_strategy(*model, *u, ctx, c);
      if (static_cast<std::size_t>(to_id(plan.chosen)) != first_argmax(model->next_dist(ctx, {}))) {
        fail(o, "mismatch on context " + std::to_string(contexts));
      }
    }
  }
  if (o.pass) o.detail = std::to_string(contexts) + " contexts over 50 Markov models";
  return o;
}

Outcome coverage_monotonicity() {
  Outcome o;
  Rng rng(404);
  int checks = 0;
  for (int m = 0; m < 100; ++m) {
    const auto table = testing::random_table(rng, 2);
    const Strategy cand = random_strategy(rng);
    double prev = 0.0;
    for (int k = 1; k <= 49; ++k, ++checks) {
      const double cover = mass(planner::exact_topk_futures(*table, PlanContext{}, cand, 3, k));
      if (cover < prev) fail(o, "mass drops at k=" + std::to_string(k) + " on model " + std::to_string(m));
      prev = cover;
    }
    if (std::abs(prev - 1.0) > 1e-12) fail(o, "full enumeration does not cover the space");
  }
  if (o.pass) o.detail = "100 models x k=1..49 (" + std::to_string(checks) + " steps)";
  return o;
}

Outcome gradient_fidelity() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto names = testing::grad_case_names();
  double worst = 0.0;
  for (const auto& name : names) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto report = testing::run_grad_case(name, seed, 1e-4, 1e-4);
      worst = std::max(worst, report.max_rel_error);
      if (!report.passed) fail(o, name + " seed " + std::to_string(seed) + " rel " + fmt("%.3g", report.max_rel_error));
    }
  }
  const double t = seconds_since(t0);
  if (t >= 60.0) fail(o, "took " + fmt("%.1f", t) + " s");
  if (o.pass) o.detail = std::to_string(names.size()) + " cases x 10 seeds, max rel " + fmt("%.2g", worst);
  return o;
}

Outcome ufp_recovery() {
  Outcome o;
  Rng rng(606);
  const std::size_t dim = 4;
  const int max_len = 4;
  std::vector<double> w(ufp::feature_dim(dim));
  for (auto& x : w) x = rng.uniform(-1.0, 1.0);
  std::vector<ufp::TrainingExample> data;
  for (int i = 0; i < 500; ++i) {
    ufp::TrainingExample ex;
    ex.sequence.resize(1 + rng.index(max_len));
    for (auto& s : ex.sequence) s = random_strategy(rng);
    ex.states.resize(1 + rng.index(3));
    for (auto& u : ex.states) u = random_state(rng, dim);
    const auto phi = ufp::featurize_sequence(ex.sequence, ex.states, dim);
    ex.score = std::inner_product(phi.begin(), phi.end(), w.begin(), 0.4);
    data.push_back(ex);
  }
  const auto lin = ufp::train_linear(data, 1e-8, max_len);
  double err = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) err = std::max(err, std::abs(lin->weights()[i] - w[i]));
  if (!(err < 1e-6)) fail(o, "linear |w - w*|_inf = " + fmt("%.3g", err));

  ufp::TrainingExample ex{{Strategy::kQuestion, Strategy::kSelfDisclosure},
                          {{0.3, 0.1, 0.8}, {0.6, 0.5, 0.2}},
                          4.0,
                          false};
  ufp::NeuralUfpConfig nc;
  nc.d_emb = 16;
  nc.heads = 2;
  nc.d_ff = 32;
  nc.state_dim = 3;
  nc.max_len = 4;
  nc.lr = 1e-2;
  ssg::TrainLog log;
  ufp::train_neural(std::vector<ufp::TrainingExample>(4, ex), nc, 500, &log);
  const double mse = log.epoch_loss.back();
  if (!(mse < 1e-3)) fail(o, "neural MSE " + fmt("%.3g", mse));
  if (o.pass) o.detail = "linear err " + fmt("%.2g", err) + ", neural MSE " + fmt("%.2g", mse);
  return o;
}

// Key oracle written from the bucketing definition, not from MarkovModel.
struct OracleKey {
  std::vector<int> gram;
  int stage, emotion;
  bool operator==(const OracleKey&) const = default;
};

OracleKey oracle_key(const PlanContext& ctx, const std::vector<Strategy>& prefix, int order) {
  std::vector<int> seq = ctx.history;
  for (auto s : prefix) seq.push_back(to_id(s));
  OracleKey k{std::vector<int>(static_cast<std::size_t>(order), kNumStrategies), 0, 0};
  for (int i = 0; i < order && i < static_cast<int>(seq.size()); ++i) {
    k.gram[static_cast<std::size_t>(order - 1 - i)] = seq[seq.size() - 1 - static_cast<std::size_t>(i)];
  }
  if (ctx.num_rounds > 0 && ctx.round > 0) {
    k.stage = static_cast<int>(std::ceil(5.0 * ctx.round / ctx.num_rounds));
    k.stage = std::clamp(k.stage, 1, 5);
  }
  if (!ctx.user_states.empty()) {
    const auto& u = ctx.user_states.back();
    const double coverage = u[u.size() - 3];
    const double valence = u[u.size() - 2];
    if (coverage > 0.0) k.emotion = valence < 1.0 / 3 ? 1 : valence < 2.0 / 3 ? 2 : 3;
  }
  return k;
}

Outcome markov_exactness() {
  Outcome o;
  testing::CorpusSpec spec;
  spec.dialogues = 50;
  spec.seed = 77;
  const auto lex = lexicon::load_vad(testing::synthetic_lexicon(500, 7));
  const auto records = testing::synthetic_records(testing::synthetic_corpus(spec), lex, 2);
  const auto train = dataset::planning_split(records.planning, "train");
  std::size_t queries = 0;
  for (int order : {1, 2}) {
    ssg::MarkovConfig mc;
    mc.order = order;
    mc.alpha = 0.0;
    const auto model = ssg::train_markov(train, mc);
    // Every (context, prefix, next) observation, keyed by the oracle.
    std::vector<std::pair<OracleKey, Strategy>> obs;
    for (const auto& ex : train) {
      std::vector<Strategy> prefix;
      for (auto s : ex.target) {
        obs.emplace_back(oracle_key(ex.context, prefix, order), s);
        prefix.push_back(s);
      }
    }
    for (const auto& ex : train) {
      std::vector<Strategy> prefix;
      for (auto s : ex.target) {
        const auto key = oracle_key(ex.context, prefix, order);
        std::array<std::uint64_t, kNumPlanable> counts{};
        std::uint64_t total = 0;
        for (const auto& [k, next] : obs) {
          if (k == key) {
            ++counts[static_cast<std::size_t>(to_id(next))];
            ++total;
          }
        }
        const auto d = model->next_dist(ex.context, prefix);
        for (std::size_t j = 0; j < kNumPlanable; ++j) {
          const double want = static_cast<double>(counts[j]) / static_cast<double>(total);
          if (d[j] != want) fail(o, "order " + std::to_string(order) + " probability differs from recount");
        }
        ++queries;
        prefix.push_back(s);
      }
    }
  }
  if (o.pass) o.detail = std::to_string(queries) + " conditionals x 7 strategies match exactly";
  return o;
}

Outcome quantizer_totality() {
  Outcome o;
  const auto lex = lexicon::load_vad(testing::synthetic_lexicon(20000, 8));
  if (lex.size() != 20000) fail(o, "lexicon has " + std::to_string(lex.size()) + " entries");
  for (const auto& [word, s] : lex.entries()) {
    const int id = lex.emotion_id(word);
    if (id < 0 || id >= 64) fail(o, "invalid id for " + word);
  }
  for (const auto& [nv, na] : std::vector<std::pair<int, int>>{{8, 8}, {4, 2}, {3, 5}}) {
    for (int i = 0; i <= 20; ++i) {
      const double x = i / 20.0;
      if (lexicon::quantize(0.0, x, nv, na) % nv != 0) fail(o, "valence 0 not in cell 0");
      if (lexicon::quantize(1.0, x, nv, na) % nv != nv - 1) fail(o, "valence 1 not in cell n-1");
      if (lexicon::quantize(x, 0.0, nv, na) / nv != 0) fail(o, "arousal 0 not in cell 0");
      if (lexicon::quantize(x, 1.0, nv, na) / nv != na - 1) fail(o, "arousal 1 not in cell n-1");
    }
  }
  // Each point lies in exactly one cell preimage, and quantize names it.
  Rng rng(808);
  std::vector<std::uint64_t> hits(64, 0);
  for (int i = 0; i < 100000; ++i) {
    const double v = rng.uniform(), a = rng.uniform();
    int owner = -1, owners = 0;
    for (int cell = 0; cell < 64; ++cell) {
      const int vi = cell % 8, ai = cell / 8;
      const bool in_v = vi / 8.0 <= v && (v < (vi + 1) / 8.0 || (vi == 7 && v <= 1.0));
      const bool in_a = ai / 8.0 <= a && (a < (ai + 1) / 8.0 || (ai == 7 && a <= 1.0));
      if (in_v && in_a) {
        owner = cell;
        ++owners;
      }
    }
    if (owners != 1 || lexicon::quantize(v, a, 8, 8) != owner) fail(o, "point not tiled exactly once");
    if (owner >= 0) ++hits[static_cast<std::size_t>(owner)];
  }
  if (std::count(hits.begin(), hits.end(), 0u) > 0) fail(o, "some cell received no points");
  if (o.pass) o.detail = "20000 entries valid, 1e5 points tile 64 cells";
  return o;
}

Outcome corpus_golden(const std::string& cli) {
  Outcome o;
  const auto ds = corpus::parse_esconv(testing::read_text(testing::data_path("adaptation_fixture.json")));
  if (testing::render_dialogues(ds) != testing::read_text(testing::data_path("adaptation_expected.txt"))) {
    fail(o, "adaptation fixture output differs");
    return o;
  }
  const char* real = std::getenv("MULTIESC_ESCONV");
  if (!real || !*real) {
    o.detail = "fixture byte-exact; real-corpus proportions skipped (MULTIESC_ESCONV unset)";
    return o;
  }
  const auto dir = fs::temp_directory_path() / "multiesc-acceptance-esconv";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string lexicon_path;
  if (const char* l = std::getenv("MULTIESC_LEXICON"); l && *l) {
    lexicon_path = l;
  } else {
    lexicon_path = (dir / "lexicon.tsv").string();
    std::ofstream(lexicon_path) << testing::synthetic_lexicon(100, 1);
  }
  const auto cmd = cli + " ingest --corpus '" + real + "' --lexicon '" + lexicon_path + "' --out-dir '" +
                   (dir / "out").string() + "' > /dev/null";
  if (std::system(cmd.c_str()) != 0) {
    fail(o, "ingest failed on the real corpus");
    return o;
  }
  const auto report = json::parse(testing::read_text((dir / "out/report.json").string()));
  double worst = 0.0;
  for (const auto& row : report.at("strategy_distribution")) {
    worst = std::max(worst, std::abs(row.at("percent").get<double>() - row.at("reference_percent").get<double>()));
  }
  if (!(worst <= 0.5)) fail(o, "proportions differ by up to " + fmt("%.2f", worst) + " pp");
  if (o.pass) o.detail = "fixture byte-exact; real corpus within " + fmt("%.2f", worst) + " pp";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ingest -> train-ssg (markov and neural) -> train-ufp (linear and neural)
// -> eval and sweep, all through the command-line binary.
bool run_pipeline(const std::string& cli, const fs::path& in, const fs::path& out) {
  auto sh = [&](const std::string& args) {
    return std::system((cli + " " + args + " > /dev/null 2>> '" + (out / "stderr.txt").string() + "'").c_str()) == 0;
  };
  fs::remove_all(out);
  fs::create_directories(out);
  const auto d = out.string();
  const auto planning = d + "/data/planning.jsonl";
  const auto feedback = d + "/data/feedback.jsonl";
  return sh("ingest --corpus " + (in / "corpus.json").string() + " --lexicon " + (in / "lexicon.tsv").string() +
            " --out-dir " + d + "/data --seed 5") &&
         sh("train-ssg --examples " + planning + " --out " + d + "/ssg.json") &&
         sh("train-ssg --examples " + planning + " --out " + d + "/ssg-neural.json --backend neural" +
            " --d-emb 32 --heads 4 --layers 2 --d-ff 64 --window 32 --epochs 5 --seed 3") &&
         sh("train-ufp --examples " + feedback + " --out " + d + "/ufp.json --max-len 2") &&
         sh("train-ufp --examples " + feedback + " --out " + d + "/ufp-neural.json --backend neural" +
            " --max-len 2 --d-emb 16 --heads 2 --d-ff 32 --epochs 20 --augment 500 --seed 3") &&
         sh("eval --ssg " + d + "/ssg.json --ufp " + d + "/ufp.json --examples " + planning + " --out " + d +
            "/eval.json") &&
         sh("eval --ssg " + d + "/ssg-neural.json --ufp " + d + "/ufp-neural.json --examples " + planning +
            " --out " + d + "/eval-neural.json") &&
         sh("sweep --ssg " + d + "/ssg.json --ufp " + d + "/ufp.json --examples " + planning +
            " --axis k --values 1..8 --out " + d + "/sweep.csv");
}

Outcome end_to_end_determinism(const std::string& cli) {
  Outcome o;
  const auto root = fs::temp_directory_path() / "multiesc-acceptance-e2e";
  fs::remove_all(root);
  fs::create_directories(root / "in");
  testing::CorpusSpec spec;
  spec.dialogues = 200;
  spec.seed = 10;
  std::ofstream(root / "in/corpus.json") << testing::synthetic_corpus(spec);
  std::ofstream(root / "in/lexicon.tsv") << testing::synthetic_lexicon(2000, 10);

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::string> files = {"ssg.json",  "ssg-neural.json", "ufp.json",  "ufp-neural.json",
                                          "eval.json", "eval-neural.json", "sweep.csv"};
  std::vector<std::string> first;
  for (int run = 0; run < 2; ++run) {
    if (!run_pipeline(cli, root / "in", root / "out")) {
      fail(o, "pipeline command failed: " + slurp(root / "out/stderr.txt"));
      return o;
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
      const auto bytes = slurp(root / "out" / files[i]);
      if (run == 0) {
        first.push_back(bytes);
      } else if (bytes != first[i]) {
        fail(o, files[i] + " differs between runs");
      }
    }
  }
  const double t = seconds_since(t0) / 2.0;
  if (t >= 300.0) fail(o, "one pipeline took " + fmt("%.0f", t) + " s");
  if (o.pass) o.detail = "200 dialogues, 7 artifacts bit-identical, " + fmt("%.1f", t) + " s per run";
  return o;
}

Outcome planted_advantage() {
  Outcome o;
  const auto lex = lexicon::load_vad(testing::synthetic_lexicon(2000, 3));
  int wins = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto records =
        testing::synthetic_records(testing::synthetic_corpus(testing::planted_spec(200, seed)), lex, 2, seed);
    const auto train = dataset::planning_split(records.planning, "train");
    const auto test = dataset::planning_split(records.planning, "test");
    const auto ssg = ssg::train_markov(train, ssg::MarkovConfig{});
    const auto ufp = ufp::train_linear(dataset::feedback_split(records.feedback, "train"), 1e-3, 8);
    // Scored by a predictor fit on held-out dialogues.
    const auto metric = ufp::train_linear(dataset::feedback_split(records.feedback, "validation"), 1.0, 8);
    eval::EvalOptions options;
    options.metric_ufp = metric.get();
    planner::PlannerConfig look, myopic;
    myopic.lambda = 0.0;
    const auto a = eval::run_eval(*ssg, *ufp, test, look, options);
    const auto b = eval::run_eval(*ssg, *ufp, test, myopic, options);
    if (a.feedback > b.feedback) ++wins;
    per_seed += (per_seed.empty() ? "" : " ") + fmt("%.2f", a.feedback) + "/" + fmt("%.2f", b.feedback);
  }
  if (wins < 4) fail(o, std::to_string(wins) + "/5 seeds favour lookahead (" + per_seed + ")");
  if (o.pass) o.detail = std::to_string(wins) + "/5 seeds, feedback lambda 0.7/0: " + per_seed;
  return o;
}

}  // namespace

int main() {
  const std::string cli = MULTIESC_CLI_PATH;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"beam/oracle equivalence", beam_oracle_equivalence},
      {"lookahead flip on the toy", lookahead_flip},
      {"lambda=0 reduces to argmax", lambda_zero_reduction},
      {"coverage monotone in k", coverage_monotonicity},
      {"gradient fidelity", gradient_fidelity},
      {"UFP recovery and memorization", ufp_recovery},
      {"Markov exactness", markov_exactness},
      {"quantizer totality", quantizer_totality},
      {"corpus adaptation golden", [&] { return corpus_golden(cli); }},
      {"end-to-end determinism", [&] { return end_to_end_determinism(cli); }},
      {"planted advantage", planted_advantage},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2zu %-32s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
