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

#include "multiesc/cli.hpp"

#include <CLI11.hpp>
#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "multiesc/corpus.hpp"
#include "multiesc/dataset.hpp"
#include "multiesc/error.hpp"
#include "multiesc/eval.hpp"
#include "multiesc/feedback.hpp"
#include "multiesc/lexicon.hpp"
#include "multiesc/planner.hpp"
#include "multiesc/seqmodel.hpp"
#include "multiesc/text.hpp"
#include "multiesc/user_state.hpp"

namespace multiesc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Keys that only say where results go; they do not change any result and
// are left out of the fingerprint.
bool is_location_key(const std::string& key) { return key == "out" || key == "out_dir" || key == "log"; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cli", "MissingFile", "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cli", "WriteFailed", "cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cli", "WriteFailed", "short write to '" + path + "'");
}

std::string existing_path(const RunConfig& config, const std::string& key) {
  const auto path = config.required(key);
  if (!fs::is_regular_file(path)) {
    throw Error("cli", "MissingFile", key + " file '" + path + "' does not exist");
  }
  return path;
}

planner::PlannerConfig planner_config(const RunConfig& config) {
  planner::PlannerConfig p;
  p.lambda = config.real("lambda", p.lambda);
  p.plan_length = static_cast<int>(config.integer("plan_length", p.plan_length));
  p.beam_size = static_cast<int>(config.integer("beam_size", p.beam_size));
  p.renormalize_topk = config.boolean("renormalize", p.renormalize_topk);
  try {
    planner::validate(p);
  } catch (const Error& e) {
    throw Error("cli", "BadConfig", e.what());
  }
  return p;
}

eval::FeedbackMode feedback_mode(const RunConfig& config) {
  const auto mode = config.str("feedback_mode", "single");
  if (mode == "single") return eval::FeedbackMode::kSingleStep;
  if (mode == "continuation") return eval::FeedbackMode::kContinuation;
  throw Error("cli", "BadConfig", "feedback_mode must be 'single' or 'continuation'");
}

user_state::OovMode oov_mode(const RunConfig& config) {
  const auto mode = config.str("oov", "special");
  if (mode == "special") return user_state::OovMode::kSpecialBin;
  if (mode == "average") return user_state::OovMode::kAverage;
  throw Error("cli", "BadConfig", "oov must be 'special' or 'average'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string with_fingerprint(std::string checkpoint, const std::string& fingerprint) {
  json j = json::parse(checkpoint);
  j["fingerprint"] = fingerprint;
  return j.dump();
}

std::string checksum(std::string_view bytes) { return hex64(fnv1a64(bytes)); }

std::size_t infer_state_dim(const std::vector<ssg::TrainingExample>& examples) {
  for (const auto& ex : examples) {
    if (!ex.context.user_states.empty()) return ex.context.user_states.front().size();
  }
  return 69;
}

std::vector<int> int_list(const RunConfig& config, const std::string& key) {
  std::vector<int> out;
  for (const auto& item : split_list(config.str(key))) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw Error("cli", "BadConfig", key + " must be a comma-separated list of integers");
    }
  }
  return out;
}

// "1,2,4" or "1..8" (inclusive, step 1).
std::vector<double> sweep_values(const std::string& spec) {
  std::vector<double> out;
  const auto dots = spec.find("..");
  try {
    if (dots != std::string::npos) {
      const double lo = std::stod(spec.substr(0, dots));
      const double hi = std::stod(spec.substr(dots + 2));
      for (double v = lo; v <= hi + 1e-12; v += 1.0) out.push_back(v);
    } else {
      for (const auto& item : split_list(spec)) out.push_back(std::stod(item));
    }
  } catch (const std::exception&) {
    throw Error("cli", "BadConfig", "cannot parse sweep values '" + spec + "'");
  }
  if (out.empty()) throw Error("cli", "BadConfig", "no sweep values given");
  return out;
}

// Strategy proportions reported for the adapted corpus, in percent.
constexpr std::array<double, kNumStrategies> kReferenceDistribution = {
    21.77, 6.46, 8.05, 9.34, 16.13, 22.02, 8.72, 7.49};

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("cli", "BadConfig", "line " + std::to_string(number) + ": expected key=value");
    }
    const auto key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw Error("cli", "BadConfig", "line " + std::to_string(number) + ": empty key");
    config.set(key, trim(std::string_view(line).substr(eq + 1)));
  }
  return config;
}

void RunConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

void RunConfig::merge(const RunConfig& overrides) {
  for (const auto& [k, v] : overrides.values_) values_[k] = v;
}

std::string RunConfig::str(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::real(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != it->second.size() || !std::isfinite(v)) {
    throw Error("cli", "BadConfig", key + "='" + it->second + "' is not a number");
  }
  return v;
}

long long RunConfig::integer(const std::string& key, long long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != it->second.size()) {
    throw Error("cli", "BadConfig", key + "='" + it->second + "' is not an integer");
  }
  return v;
}

bool RunConfig::boolean(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto v = to_lower(it->second);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error("cli", "BadConfig", key + "='" + it->second + "' is not a boolean");
}

std::string RunConfig::required(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) {
    throw Error("cli", "BadConfig", "missing required setting '" + key + "'");
  }
  return it->second;
}

std::string RunConfig::fingerprint() const {
  std::string lines;
  for (const auto& [k, v] : values_) {
    if (!is_location_key(k)) lines += k + "=" + v + "\n";
  }
  return hex64(fnv1a64(lines));
}

// ---------------------------------------------------------------------------
// Commands

void cmd_ingest(const RunConfig& config, std::ostream& out) {
  const auto corpus_path = existing_path(config, "corpus");
  const auto lexicon_path = existing_path(config, "lexicon");
  const auto out_dir = config.required("out_dir");
  const auto seed = static_cast<std::uint64_t>(config.integer("seed", 13));
  dataset::BuildOptions options;
  options.plan_length = static_cast<int>(config.integer("plan_length", options.plan_length));
  options.window = static_cast<std::size_t>(config.integer("window", static_cast<long long>(options.window)));
  options.oov = oov_mode(config);
  const int n_valence = static_cast<int>(config.integer("n_valence", 8));
  const int n_arousal = static_cast<int>(config.integer("n_arousal", 8));
  if (options.plan_length < 1) throw Error("cli", "BadConfig", "plan_length must be >= 1");

  const auto lex = lexicon::load_vad(read_file(lexicon_path), n_valence, n_arousal);
  const auto dialogues = corpus::parse_esconv(read_file(corpus_path));
  const auto splits = corpus::split_corpus(dialogues.size(), seed);
  const auto records = dataset::build_records(dialogues, splits, lex, options);
  const auto fp = config.fingerprint();
  const json meta = {{"fingerprint", fp}};

  write_file(out_dir + "/planning.jsonl", dataset::write_planning(records.planning, records.state_dim, meta));
  write_file(out_dir + "/feedback.jsonl", dataset::write_feedback(records.feedback, records.state_dim, meta));
  auto ids = [&](const std::vector<std::size_t>& idx) {
    json a = json::array();
    for (auto i : idx) a.push_back(dialogues[i].id);
    return a;
  };
  write_file(out_dir + "/splits.json", json{{"fingerprint", fp},
                                            {"seed", seed},
                                            {"train", ids(splits.train)},
                                            {"validation", ids(splits.validation)},
                                            {"test", ids(splits.test)}}
                                           .dump(2) +
                                           "\n");

  std::array<std::uint64_t, kNumStrategies> counts{};
  std::uint64_t total = 0, rounds = 0;
  for (const auto& d : dialogues) {
    rounds += corpus::rounds(d).size();
    for (const auto& t : d.turns) {
      if (t.speaker != corpus::Speaker::kSupporter) continue;
      if (t.utterance_strategies.empty() && t.strategy) {
        ++counts[static_cast<std::size_t>(to_id(*t.strategy))];
        ++total;
      }
      for (auto s : t.utterance_strategies) {
        ++counts[static_cast<std::size_t>(to_id(s))];
        ++total;
      }
    }
  }
  json distribution = json::array();
  for (std::size_t s = 0; s < kNumStrategies; ++s) {
    distribution.push_back({{"strategy", strategy_name(static_cast<Strategy>(s))},
                            {"count", counts[s]},
                            {"percent", total ? 100.0 * static_cast<double>(counts[s]) / static_cast<double>(total) : 0.0},
                            {"reference_percent", kReferenceDistribution[s]}});
  }
  std::array<std::uint64_t, 5> scores{};
  for (const auto& r : records.feedback) ++scores[static_cast<std::size_t>(r.example.score) - 1];
  const json report = {{"fingerprint", fp},
                       {"dialogues", dialogues.size()},
                       {"rounds", rounds},
                       {"lexicon_entries", lex.size()},
                       {"state_dim", records.state_dim},
                       {"split_sizes",
                        {{"train", splits.train.size()},
                         {"validation", splits.validation.size()},
                         {"test", splits.test.size()}}},
                       {"planning_examples", records.planning.size()},
                       {"feedback_examples", records.feedback.size()},
                       {"feedback_histogram", scores},
                       {"strategy_distribution", std::move(distribution)}};
  write_file(out_dir + "/report.json", report.dump(2) + "\n");
  out << "dialogues: " << dialogues.size() << "\n"
      << "planning examples: " << records.planning.size() << "\n"
      << "feedback examples: " << records.feedback.size() << "\n"
      << "fingerprint: " << fp << "\n";
}

void cmd_train_ssg(const RunConfig& config, std::ostream& out) {
  const auto examples_path = existing_path(config, "examples");
  const auto out_path = config.required("out");
  const auto backend = config.str("backend", "markov");
  const auto seed = static_cast<std::uint64_t>(config.integer("seed", 0));
  const int max_plan_length = static_cast<int>(config.integer("max_plan_length", 8));
  ssg::MarkovConfig markov;
  ssg::NeuralSsgConfig neural;
  int epochs = 0;
  if (backend == "markov") {
    markov.order = static_cast<int>(config.integer("order", markov.order));
    markov.alpha = config.real("alpha", markov.alpha);
    markov.use_stage = config.boolean("use_stage", markov.use_stage);
    markov.use_emotion = config.boolean("use_emotion", markov.use_emotion);
    markov.max_plan_length = max_plan_length;
  } else if (backend == "neural") {
    neural.d_emb = static_cast<std::size_t>(config.integer("d_emb", 64));
    neural.heads = static_cast<int>(config.integer("heads", neural.heads));
    neural.layers = static_cast<int>(config.integer("layers", neural.layers));
    neural.d_ff = static_cast<std::size_t>(config.integer("d_ff", 128));
    neural.vocab_buckets = static_cast<std::size_t>(config.integer("vocab_buckets", 1024));
    neural.window = static_cast<std::size_t>(config.integer("window", 64));
    neural.lr = config.real("lr", neural.lr);
    neural.weight_decay = config.real("weight_decay", neural.weight_decay);
    neural.batch_size = static_cast<std::size_t>(config.integer("batch_size", 16));
    neural.max_plan_length = max_plan_length;
    neural.seed = seed;
    epochs = static_cast<int>(config.integer("epochs", 10));
    if (epochs < 0) throw Error("cli", "BadConfig", "epochs must be >= 0");
  } else {
    throw Error("cli", "BadConfig", "ssg backend must be 'markov' or 'neural'");
  }

  const auto records = dataset::read_planning(read_file(examples_path));
  const auto train = dataset::planning_split(records, config.str("split", "train"));
  const auto validation = dataset::planning_split(records, "validation");
  ssg::TrainLog log;
  std::unique_ptr<ssg::SequenceModel> model;
  if (backend == "markov") {
    auto m = ssg::train_markov(train, markov);
    log.epoch_loss.push_back(m->nll(train));
    out << "train nll: " << log.epoch_loss.back() << "\n";
    if (!validation.empty()) out << "validation nll: " << m->nll(validation) << "\n";
    model = std::move(m);
  } else {
    neural.state_dim = infer_state_dim(train);
    neural.num_emotions = neural.state_dim - static_cast<std::size_t>(user_state::kNumAuxFeatures);
    model = ssg::train_neural_ssg(train, neural, epochs, &log);
    out << "final loss: " << log.epoch_loss.back() << "\n";
  }
  const auto bytes = with_fingerprint(ssg::save(*model), config.fingerprint());
  write_file(out_path, bytes);
  if (config.has("log")) write_file(config.str("log"), log.to_csv("nll"));
  out << "examples: " << train.size() << "\n"
      << "checkpoint: " << out_path << " (" << checksum(bytes) << ")\n";
}

void cmd_train_ufp(const RunConfig& config, std::ostream& out) {
  const auto examples_path = existing_path(config, "examples");
  const auto out_path = config.required("out");
  const auto backend = config.str("backend", "linear");
  const int max_len = static_cast<int>(config.integer("max_len", 8));
  const long long augment_count = config.integer("augment", 0);
  const auto seed = static_cast<std::uint64_t>(config.integer("seed", 0));
  const double ridge = config.real("ridge", 1e-3);
  if (augment_count < 0) throw Error("cli", "BadConfig", "augment must be >= 0");
  if (max_len < 1) throw Error("cli", "BadConfig", "max_len must be >= 1");
  if (backend != "linear" && backend != "neural") {
    throw Error("cli", "BadConfig", "ufp backend must be 'linear' or 'neural'");
  }
  ufp::NeuralUfpConfig neural;
  neural.d_emb = static_cast<std::size_t>(config.integer("d_emb", 32));
  neural.heads = static_cast<int>(config.integer("heads", neural.heads));
  neural.d_ff = static_cast<std::size_t>(config.integer("d_ff", 64));
  neural.head_sees_query = config.boolean("head_sees_query", false);
  neural.lr = config.real("lr", neural.lr);
  neural.weight_decay = config.real("weight_decay", neural.weight_decay);
  neural.batch_size = static_cast<std::size_t>(config.integer("batch_size", 16));
  neural.max_len = max_len;
  neural.seed = seed;
  const int epochs = static_cast<int>(config.integer("epochs", 50));

  const auto records = dataset::read_feedback(read_file(examples_path));
  std::vector<ufp::TrainingExample> train;
  for (const auto& split : split_list(config.str("split", "train"))) {
    auto part = dataset::feedback_split(records, split);
    train.insert(train.end(), part.begin(), part.end());
  }
  const auto real_count = train.size();
  train = ufp::augment(std::move(train), static_cast<std::size_t>(augment_count), max_len,
                       seed ^ 0xa5a5a5a5ULL);
  out << "examples: " << real_count << "\n"
      << "augmented: " << train.size() - real_count << "\n";

  ssg::TrainLog log;
  std::unique_ptr<ufp::FeedbackModel> model;
  if (backend == "linear") {
    auto m = ufp::train_linear(train, ridge, max_len);
    double sq = 0.0;
    for (const auto& ex : train) {
      const double d = m->raw(ex.sequence, ex.states) - ex.score;
      sq += d * d;
    }
    log.epoch_loss.push_back(train.empty() ? 0.0 : sq / static_cast<double>(train.size()));
    model = std::move(m);
  } else {
    for (const auto& ex : train) {
      if (!ex.states.empty()) {
        neural.state_dim = ex.states.front().size();
        break;
      }
    }
    model = ufp::train_neural(train, neural, epochs, &log);
  }
  out << "final loss: " << log.epoch_loss.back() << "\n";
  const auto bytes = with_fingerprint(ufp::save(*model), config.fingerprint());
  write_file(out_path, bytes);
  if (config.has("log")) write_file(config.str("log"), log.to_csv("mse"));
  out << "checkpoint: " << out_path << " (" << checksum(bytes) << ")\n";
}

void cmd_plan(const RunConfig& config, std::ostream& out) {
  const auto pc = planner_config(config);
  const auto ssg_path = existing_path(config, "ssg");
  const auto ufp_path = existing_path(config, "ufp");
  const auto context_path = existing_path(config, "context");
  const auto ssg_model = ssg::load(read_file(ssg_path));
  const auto ufp_model = ufp::load(read_file(ufp_path));
  json context_json;
  try {
    context_json = json::parse(read_file(context_path));
  } catch (const json::parse_error& e) {
    throw Error("dataset", "Corrupt", std::string("context is not valid JSON: ") + e.what());
  }
  const auto ctx = dataset::context_from_json(context_json);
  auto record = planner::plan_to_json(planner::select_strategy(*ssg_model, *ufp_model, ctx, pc));
  record["fingerprint"] = config.fingerprint();
  const auto text = record.dump(2) + "\n";
  if (config.has("out")) write_file(config.str("out"), text);
  out << text;
}

namespace {

struct EvalInputs {
  std::unique_ptr<ssg::SequenceModel> ssg;
  std::unique_ptr<ufp::FeedbackModel> ufp;
  std::unique_ptr<ufp::FeedbackModel> metric_ufp;
  std::vector<ssg::TrainingExample> test;
  json provenance;
  eval::EvalOptions options;
};

EvalInputs load_eval_inputs(const RunConfig& config) {
  const auto ssg_path = existing_path(config, "ssg");
  const auto ufp_path = existing_path(config, "ufp");
  const auto examples_path = existing_path(config, "examples");
  std::string metric_path;
  if (config.has("metric_ufp")) metric_path = existing_path(config, "metric_ufp");

  EvalInputs in;
  in.options.feedback_mode = feedback_mode(config);
  in.options.execution = config.boolean("parallel", true) ? planner::Execution::kParallel
                                                          : planner::Execution::kSerial;
  if (config.has("top_n")) in.options.top_n = int_list(config, "top_n");

  const auto ssg_bytes = read_file(ssg_path);
  const auto ufp_bytes = read_file(ufp_path);
  in.ssg = ssg::load(ssg_bytes);
  in.ufp = ufp::load(ufp_bytes);
  in.provenance = {{"fingerprint", config.fingerprint()},
                   {"ssg_checksum", checksum(ssg_bytes)},
                   {"ufp_checksum", checksum(ufp_bytes)}};
  if (!metric_path.empty()) {
    const auto metric_bytes = read_file(metric_path);
    in.metric_ufp = ufp::load(metric_bytes);
    in.options.metric_ufp = in.metric_ufp.get();
    in.provenance["metric_ufp_checksum"] = checksum(metric_bytes);
  } else {
    in.provenance["metric_ufp_checksum"] = checksum(ufp_bytes);
  }
  const auto records = dataset::read_planning(read_file(examples_path));
  in.test = dataset::planning_split(records, config.str("split", "test"));
  return in;
}

}  // namespace

void cmd_eval(const RunConfig& config, std::ostream& out) {
  const auto pc = planner_config(config);
  auto in = load_eval_inputs(config);
  const auto metrics = eval::run_eval(*in.ssg, *in.ufp, in.test, pc, in.options);
  json result = in.provenance;
  result["metrics"] = eval::metrics_to_json(metrics);
  result["planner"] = {{"lambda", pc.lambda},
                       {"plan_length", pc.plan_length},
                       {"beam_size", pc.beam_size},
                       {"renormalize", pc.renormalize_topk}};
  result["feedback_mode"] = config.str("feedback_mode", "single");
  result["reference"] = {{"accuracy", eval::kReferenceAccuracy},
                         {"weighted_f1", eval::kReferenceWeightedF1},
                         {"feedback", eval::kReferenceFeedback},
                         {"feedback_without_lookahead", eval::kReferenceFeedbackNoLookahead}};
  const auto text = result.dump(2) + "\n";
  if (config.has("out")) write_file(config.str("out"), text);
  out << text;
}

void cmd_sweep(const RunConfig& config, std::ostream& out) {
  const auto pc = planner_config(config);
  const auto axis = eval::axis_from_name(config.required("axis"));
  const auto values = sweep_values(config.required("values"));
  auto in = load_eval_inputs(config);
  const auto result = eval::sweep(axis, values, pc, *in.ssg, *in.ufp, in.test, in.options);
  const auto csv = eval::sweep_to_csv(result);
  if (config.has("out")) {
    const auto path = config.str("out");
    write_file(path, csv);
    write_file(path + ".meta.json", in.provenance.dump(2) + "\n");
  }
  out << csv;
}

void cmd_inspect_lexicon(const RunConfig& config, std::ostream& out) {
  const auto path = existing_path(config, "lexicon");
  const int n_valence = static_cast<int>(config.integer("n_valence", 8));
  const int n_arousal = static_cast<int>(config.integer("n_arousal", 8));
  const auto lex = lexicon::load_vad(read_file(path), n_valence, n_arousal);
  std::vector<std::uint64_t> occupancy(static_cast<std::size_t>(lex.config().num_cells()), 0);
  for (const auto& [word, score] : lex.entries()) {
    ++occupancy[static_cast<std::size_t>(lexicon::quantize(score.valence, score.arousal, n_valence, n_arousal))];
  }
  json words = json::array();
  for (const auto& w : split_list(config.str("words"))) {
    const auto score = lex.find(w);
    json entry = {{"word", w}, {"emotion_id", lex.emotion_id(w)}};
    if (score) {
      entry["valence"] = score->valence;
      entry["arousal"] = score->arousal;
      entry["dominance"] = score->dominance;
    }
    words.push_back(std::move(entry));
  }
  json report = {{"entries", lex.size()},
                 {"n_valence", n_valence},
                 {"n_arousal", n_arousal},
                 {"cells", lex.config().num_cells()},
                 {"special_id", lex.config().special_id()},
                 {"occupancy", occupancy},
                 {"words", std::move(words)}};
  if (config.has("text")) {
    const auto tokens = tokenize(read_file(existing_path(config, "text")));
    const auto state = user_state::build_user_state({}, tokens, std::nullopt, lex, oov_mode(config));
    const auto layout = user_state::layout_for(lex);
    report["text"] = {
        {"tokens", tokens.size()},
        {"histogram", std::vector<double>(state.vector.begin(), state.vector.begin() + layout.num_emotions)},
        {"coverage", state.vector[static_cast<std::size_t>(layout.coverage())]}};
  }
  out << report.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  using Command = void (*)(const RunConfig&, std::ostream&);
  struct Spec {
    const char* name;
    const char* help;
    Command command;
    std::vector<std::string> keys;
  };
  const std::vector<std::string> planner_keys = {"lambda", "plan_length", "beam_size", "renormalize"};
  auto with_planner = [&](std::vector<std::string> keys) {
    keys.insert(keys.end(), planner_keys.begin(), planner_keys.end());
    return keys;
  };
  const std::vector<Spec> specs = {
      {"ingest", "Parse a corpus and write example files, splits and a report", cmd_ingest,
       {"corpus", "lexicon", "out_dir", "seed", "plan_length", "window", "oov", "n_valence", "n_arousal"}},
      {"train-ssg", "Train a strategy sequence model", cmd_train_ssg,
       {"examples", "out", "log", "backend", "split", "seed", "order", "alpha", "use_stage",
        "use_emotion", "max_plan_length", "d_emb", "heads", "layers", "d_ff", "vocab_buckets",
        "window", "epochs", "lr", "weight_decay", "batch_size"}},
      {"train-ufp", "Train a user feedback predictor", cmd_train_ufp,
       {"examples", "out", "log", "backend", "split", "seed", "ridge", "augment", "max_len", "d_emb",
        "heads", "d_ff", "head_sees_query", "epochs", "lr", "weight_decay", "batch_size"}},
      {"plan", "Select the next strategy for one context", cmd_plan,
       with_planner({"ssg", "ufp", "context", "out"})},
      {"eval", "Evaluate the planner on a split", cmd_eval,
       with_planner({"ssg", "ufp", "metric_ufp", "examples", "split", "feedback_mode", "top_n",
                     "parallel", "out"})},
      {"sweep", "Evaluate over a range of one planner setting", cmd_sweep,
       with_planner({"ssg", "ufp", "metric_ufp", "examples", "split", "feedback_mode", "top_n",
                     "parallel", "axis", "values", "out"})},
      {"inspect-lexicon", "Summarize a VAD lexicon and its quantization", cmd_inspect_lexicon,
       {"lexicon", "n_valence", "n_arousal", "words", "text", "oov"}},
  };

  CLI::App app{"multiesc: lookahead strategy planning for emotional support dialogue"};
  app.require_subcommand(1, 1);
  struct Bound {
    CLI::App* app;
    const Spec* spec;
    std::string config_path;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;
  };
  std::vector<Bound> bound(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto& b = bound[i];
    b.spec = &specs[i];
    b.app = app.add_subcommand(specs[i].name, specs[i].help);
    b.app->add_option("--config", b.config_path, "key=value settings file");
    b.app->add_option("--set", b.sets, "override one setting, key=value");
    for (const auto& key : specs[i].keys) {
      std::string flag = key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      b.app->add_option("--" + flag, b.flags[key], "setting '" + key + "'");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  for (auto& b : bound) {
    if (!b.app->parsed()) continue;
    try {
      RunConfig config;
      if (!b.config_path.empty()) config = RunConfig::parse(read_file(b.config_path));
      for (const auto& [key, value] : b.flags) {
        if (b.app->count("--" + [&] {
              std::string flag = key;
              std::replace(flag.begin(), flag.end(), '_', '-');
              return flag;
            }()) > 0) {
          config.set(key, value);
        }
      }
      for (const auto& s : b.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw Error("cli", "BadConfig", "--set expects key=value, got '" + s + "'");
        }
        config.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
      }
      b.spec->command(config, out);
      return 0;
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      err << "error: internal: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}

}  // namespace multiesc::cli
