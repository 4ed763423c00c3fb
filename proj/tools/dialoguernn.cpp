// Copyright 2026 The DialogueRNN-cpp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Exit codes: 0 success, 1 usage, 2 validation,
// 3 runtime.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dialoguernn/checkpoint.hpp"
#include "dialoguernn/corpus.hpp"
#include "dialoguernn/errors.hpp"
#include "dialoguernn/evaluation.hpp"
#include "dialoguernn/format.hpp"
#include "dialoguernn/metrics.hpp"
#include "dialoguernn/training.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace drnn;

namespace {

constexpr int kUsage = 1;
constexpr int kValidation = 2;
constexpr int kRuntime = 3;

// ------------------------------------------------------------ file helpers

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// Run directory: --out when given, else $DIALOGUERNN_OUT_ROOT (default
// "runs") / <UTC timestamp>_seed<seed>.
fs::path run_directory(const std::string& out, std::uint64_t seed) {
  fs::path dir;
  if (!out.empty()) {
    dir = out;
  } else {
    const char* root = std::getenv("DIALOGUERNN_OUT_ROOT");
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
    dir = fs::path(root && *root ? root : "runs") / (std::string(stamp) + "_seed" + std::to_string(seed));
  }
  fs::create_directories(dir);
  return dir;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const std::uint64_t lo = std::stoull(text.substr(0, dots));
      const std::uint64_t hi = std::stoull(text.substr(dots + 2));
      if (hi < lo) throw ValidationError("seed range '" + text + "' is empty");
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) seeds.push_back(std::stoull(item));
    }
  } catch (const std::logic_error&) {
    throw ValidationError("cannot parse seeds '" + text + "' (use 0..4 or 0,1,2)");
  }
  if (seeds.empty()) throw ValidationError("no seeds given");
  return seeds;
}

// ------------------------------------------------------------ run config

// Everything a run reads, resolved before it starts.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::string variant;
  double validation_fraction = 0.1;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  std::size_t workers = 1;

  json to_json() const {
    return {{"model", model},
            {"train", train},
            {"variant", variant.empty() ? json(nullptr) : json(variant)},
            {"validation_fraction", validation_fraction},
            {"test_fraction", test_fraction},
            {"split_seed", split_seed},
            {"workers", workers}};
  }
};

struct Overrides {
  std::string config_path;
  std::string variant;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<double> learning_rate;
  std::optional<double> l2;
  std::optional<double> validation_fraction;
  std::optional<std::size_t> workers;
  bool wall_time = false;

  void add_to(CLI::App* cmd, bool training_flags = true) {
    cmd->add_option("--config", config_path, "JSON run config (model, train, variant, ...)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--variant", variant, "base | l | bi | att | bi+att");
    cmd->add_option("--seed", seed, "Training seed (overrides train.seed)");
    if (!training_flags) return;
    cmd->add_option("--epochs", epochs, "Overrides train.epochs");
    cmd->add_option("--lr", learning_rate, "Overrides train.learning_rate");
    cmd->add_option("--l2", l2, "Overrides train.l2");
    cmd->add_option("--validation-fraction", validation_fraction,
                    "Share of training dialogues held out for model selection (0 disables)");
    cmd->add_option("--workers", workers, "Parallel trials for ablate/grid");
    cmd->add_flag("--wall-time", wall_time, "Record wall-clock ms per epoch (breaks byte-identity)");
  }
};

// Defaults, then the corpus manifest, then the config file, then the variant,
// then individual flags.
RunConfig resolve(const Overrides& o, const CorpusManifest& manifest) {
  RunConfig rc;
  rc.model.feature_dim = manifest.feature_dim;
  rc.model.output_dim = manifest.output_dim();
  rc.model.parties = manifest.parties;
  rc.model.mode = manifest.mode;
  if (manifest.listener_cue_dim > 0) rc.model.cue_dim = manifest.listener_cue_dim;
  if (!o.config_path.empty()) {
    const json j = parse_json_file(o.config_path);
    if (!j.is_object()) throw ValidationError(o.config_path + ": run config must be a JSON object");
    static const std::set<std::string> known{"model", "train", "variant", "validation_fraction",
                                             "test_fraction", "split_seed", "workers"};
    std::vector<std::string> unknown;
    for (const auto& [key, _] : j.items()) {
      if (!known.count(key)) unknown.push_back(o.config_path + ": unknown key '" + key + "'");
    }
    if (!unknown.empty()) throw ValidationError(std::move(unknown));
    try {
      if (j.contains("model")) from_json(j.at("model"), rc.model);
      if (j.contains("train")) from_json(j.at("train"), rc.train);
      if (j.contains("variant") && !j.at("variant").is_null()) rc.variant = j.at("variant").get<std::string>();
      rc.validation_fraction = j.value("validation_fraction", rc.validation_fraction);
      rc.test_fraction = j.value("test_fraction", rc.test_fraction);
      rc.split_seed = j.value("split_seed", rc.split_seed);
      rc.workers = j.value("workers", rc.workers);
    } catch (const json::exception& e) {
      throw ValidationError(o.config_path + ": " + e.what());
    }
  }
  if (!o.variant.empty()) rc.variant = o.variant;
  if (!rc.variant.empty()) apply_variant(rc.model, rc.variant);
  if (o.seed) rc.train.seed = *o.seed;
  if (o.epochs) rc.train.epochs = *o.epochs;
  if (o.learning_rate) rc.train.learning_rate = *o.learning_rate;
  if (o.l2) rc.train.l2 = *o.l2;
  if (o.validation_fraction) rc.validation_fraction = *o.validation_fraction;
  if (o.workers) rc.workers = *o.workers;
  if (o.wall_time) rc.train.record_wall_time = true;
  if (rc.workers == 0) throw ValidationError("workers must be >= 1");
  rc.model.validate();
  rc.train.validate();
  check_compatible(manifest, rc.model);
  return rc;
}

void echo_config(const fs::path& dir, const std::string& command, const RunConfig& rc,
                 const json& inputs) {
  json j = rc.to_json();
  j["command"] = command;
  j["inputs"] = inputs;
  write_file(dir / "config.json", j.dump(2) + "\n");
}

std::string epochs_csv(const TrainResult& r) {
  std::string text = epoch_csv_header() + "\n";
  for (const EpochRecord& e : r.epochs) text += epoch_csv_row(e) + "\n";
  return text;
}

// Splits off the validation dialogues; empty when the fraction is 0 or the
// corpus is a single dialogue.
std::pair<Corpus, std::optional<Corpus>> with_validation(const Corpus& corpus, const RunConfig& rc) {
  if (rc.validation_fraction <= 0.0 || corpus.dialogues.size() < 2) return {corpus, std::nullopt};
  auto [kept, held] = holdout_split(corpus, rc.validation_fraction, rc.train.seed);
  return {std::move(kept), std::move(held)};
}

// ------------------------------------------------------------ commands

int cmd_generate(const std::string& spec_path, std::optional<std::uint64_t> seed,
                 const std::string& out) {
  SyntheticSpec spec = synthetic_spec_from_json(read_file(spec_path));
  if (seed) spec.seed = *seed;
  const Corpus corpus = generate_synthetic(spec);
  const fs::path dir = run_directory(out, spec.seed);
  save_corpus_dir(corpus, dir.string());
  write_file(dir / "spec.json", synthetic_spec_to_json(spec));
  std::cout << "wrote " << corpus.manifest.dialogue_count << " dialogues, "
            << corpus.manifest.utterance_count << " utterances to " << dir.string() << "\n";
  return 0;
}

int cmd_train(const Overrides& o, const std::string& corpus_dir, const std::string& out) {
  const Corpus corpus = load_corpus_dir(corpus_dir);
  const RunConfig rc = resolve(o, corpus.manifest);
  const fs::path dir = run_directory(out, rc.train.seed);
  echo_config(dir, "train", rc, {{"corpus", corpus_dir}});
  auto [train_set, validation] = with_validation(corpus, rc);
  const TrainResult r = train(train_set, validation ? &*validation : nullptr, rc.model, rc.train);
  save_checkpoint((dir / "checkpoint.json").string(), rc.model, r.parameters);
  write_file(dir / "epochs.csv", epochs_csv(r));
  std::cout << "trained " << r.epochs.size() << " epochs";
  if (!r.epochs.empty()) {
    std::cout << ", best epoch " << r.best_epoch << ", final train loss "
              << format_double(r.epochs.back().train_loss);
  }
  std::cout << "\ncheckpoint " << (dir / "checkpoint.json").string() << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& corpus_dir,
             const std::string& report_path, const std::string& attention_path,
             const std::string& histogram_path) {
  const Checkpoint cp = load_checkpoint(checkpoint_path);
  const Corpus corpus = load_corpus_dir(corpus_dir);
  check_compatible(corpus.manifest, cp.config);
  const std::vector<ForwardTrace> traces = predict_corpus(corpus, cp.parameters, cp.config);
  std::string report;
  if (corpus.manifest.mode == TaskMode::kClassification) {
    report = report_json(evaluate_classification(corpus, traces), corpus.manifest.class_names);
  } else {
    report = report_json(evaluate_regression(corpus, traces), corpus.manifest.attribute_names);
  }
  if (report_path.empty()) {
    std::cout << report;
  } else {
    write_file(report_path, report);
    std::cout << "report " << report_path << "\n";
  }
  if (!attention_path.empty()) export_attention(traces, attention_path);
  if (!histogram_path.empty()) {
    if (corpus.manifest.mode != TaskMode::kClassification) {
      throw ValidationError("the attention-distance histogram needs a classification corpus");
    }
    const DistanceHistogram h = attention_distance_histogram(traces, corpus.dialogues);
    std::string text = "distance,count\n";
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
      text += std::to_string(k * h.bucket_width) + "," + std::to_string(h.counts[k]) + "\n";
    }
    write_file(histogram_path, text);
  }
  return 0;
}

int cmd_split(const std::string& corpus_dir, double fraction, std::uint64_t seed,
              const std::string& out) {
  const Corpus corpus = load_corpus_dir(corpus_dir);
  const SplitResult r = speaker_disjoint_split(corpus, fraction, seed);
  const fs::path dir = run_directory(out, seed);
  save_corpus_dir(r.train, (dir / "train").string());
  save_corpus_dir(r.test, (dir / "test").string());
  const json summary = {{"corpus", corpus_dir},
                        {"target_fraction", fraction},
                        {"seed", seed},
                        {"achieved_fraction", r.achieved_fraction},
                        {"train_dialogues", r.train.dialogues.size()},
                        {"test_dialogues", r.test.dialogues.size()},
                        {"test_speakers", r.test_speakers}};
  write_file(dir / "split.json", summary.dump(2) + "\n");
  std::cout << "achieved test fraction " << format_double(r.achieved_fraction) << " ("
            << r.test.dialogues.size() << " of " << corpus.dialogues.size() << " dialogues)\n";
  return 0;
}

int cmd_ablate(const Overrides& o, const std::string& corpus_dir, const std::string& test_dir,
               const std::string& seeds_text, const std::string& out) {
  const Corpus corpus = load_corpus_dir(corpus_dir);
  const RunConfig rc = resolve(o, corpus.manifest);
  const std::vector<std::uint64_t> seeds = parse_seeds(seeds_text);
  Corpus train_set, test;
  if (!test_dir.empty()) {
    train_set = corpus;
    test = load_corpus_dir(test_dir);
  } else {
    SplitResult split = speaker_disjoint_split(corpus, rc.test_fraction, rc.split_seed);
    train_set = std::move(split.train);
    test = std::move(split.test);
  }
  check_compatible(test.manifest, rc.model);
  const fs::path dir = run_directory(out, seeds.front());
  echo_config(dir, "ablate", rc,
              {{"corpus", corpus_dir}, {"test_corpus", test_dir}, {"seeds", seeds}});
  std::optional<Corpus> validation;
  if (rc.validation_fraction > 0.0 && train_set.dialogues.size() >= 2) {
    auto [kept, held] = holdout_split(train_set, rc.validation_fraction, rc.split_seed);
    train_set = std::move(kept);
    validation = std::move(held);
  }
  const auto rows = ablation_run(train_set, validation ? &*validation : nullptr, test, rc.model,
                                 rc.train, seeds, rc.workers);
  std::string csv = "configuration";
  for (std::uint64_t s : seeds) csv += ",seed" + std::to_string(s);
  csv += ",mean,sd\n";
  for (const AblationRow& row : rows) {
    csv += row.configuration;
    for (double f : row.weighted_f1) csv += "," + format_double(f);
    csv += "," + format_double(row.mean) + "," + format_double(row.sd) + "\n";
    std::cout << row.configuration << ": weighted F1 " << format_double(row.mean) << " ± "
              << format_double(row.sd) << "\n";
  }
  write_file(dir / "ablation.csv", csv);
  return 0;
}

int cmd_grid(const Overrides& o, const std::string& corpus_dir, const std::string& grid_path,
             const std::string& out) {
  const Corpus corpus = load_corpus_dir(corpus_dir);
  const RunConfig rc = resolve(o, corpus.manifest);
  if (rc.validation_fraction <= 0.0) throw ValidationError("grid search needs validation_fraction > 0");
  nlohmann::ordered_json g;
  try {
    g = nlohmann::ordered_json::parse(read_file(grid_path));
  } catch (const nlohmann::ordered_json::exception& e) {
    throw ValidationError(grid_path + ": " + e.what());
  }
  if (!g.is_object()) throw ValidationError(grid_path + ": grid must map axis names to value lists");
  std::vector<GridAxis> grid;
  for (const auto& [name, values] : g.items()) {
    if (!values.is_array()) throw ValidationError(grid_path + ": axis '" + name + "' must be a list");
    GridAxis axis{name, {}};
    for (const auto& v : values) {
      if (!v.is_number()) throw ValidationError(grid_path + ": axis '" + name + "' has a non-number");
      axis.values.push_back(v.get<double>());
    }
    grid.push_back(std::move(axis));
  }
  auto [train_set, validation] = with_validation(corpus, rc);
  if (!validation) throw ValidationError("grid search needs at least 2 dialogues");
  const fs::path dir = run_directory(out, rc.train.seed);
  echo_config(dir, "grid", rc, {{"corpus", corpus_dir}, {"grid", json::parse(g.dump())}});
  const GridResult r = grid_search(train_set, *validation, rc.model, rc.train, grid, rc.workers);
  std::string csv = "rank,grid_index";
  for (const GridAxis& a : grid) csv += "," + a.name;
  csv += r.higher_is_better ? ",weighted_f1\n" : ",mean_mae\n";
  for (std::size_t i = 0; i < r.ranked.size(); ++i) {
    const GridTrial& t = r.ranked[i];
    csv += std::to_string(i + 1) + "," + std::to_string(t.grid_index);
    for (const auto& [name, value] : t.assignment) csv += "," + format_double(value);
    csv += "," + format_double(t.metric) + "\n";
  }
  write_file(dir / "grid.csv", csv);
  std::cout << r.ranked.size() << " trials, best grid_index " << r.ranked.front().grid_index
            << " with " << (r.higher_is_better ? "weighted F1 " : "mean MAE ")
            << format_double(r.ranked.front().metric) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Party-state recurrent model for emotion recognition in conversation"};
  app.require_subcommand(1);

  std::string out, spec_path, corpus_dir, checkpoint_path, report_path, attention_path,
      histogram_path, test_dir, seeds_text = "0..4", grid_path;
  std::optional<std::uint64_t> gen_seed;
  std::uint64_t split_seed = 0;
  double split_fraction = 0.2;
  Overrides train_o, ablate_o, grid_o;

  CLI::App* gen = app.add_subcommand("generate", "Write a synthetic corpus");
  gen->add_option("--spec", spec_path, "Synthetic corpus spec (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", gen_seed, "Overrides the spec's seed");
  gen->add_option("--out", out, "Output directory");

  CLI::App* tr = app.add_subcommand("train", "Train a model; writes checkpoint, epoch log, config");
  tr->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  tr->add_option("--out", out, "Output directory");
  train_o.add_to(tr);

  CLI::App* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a corpus");
  ev->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required()->check(CLI::ExistingFile);
  ev->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  ev->add_option("--report", report_path, "Report file (stdout when omitted)");
  ev->add_option("--export-attention", attention_path, "Write α/β weights as CSV");
  ev->add_option("--histogram", histogram_path, "Write the attention-distance histogram as CSV");

  CLI::App* ab = app.add_subcommand("ablate", "Full model vs. its two ablations over seeds");
  ab->add_option("--corpus", corpus_dir, "Training corpus directory")->required();
  ab->add_option("--test-corpus", test_dir, "Test corpus (default: speaker-disjoint split)");
  ab->add_option("--seeds", seeds_text, "Seeds as a range 0..4 or a list 0,1,2")->capture_default_str();
  ab->add_option("--out", out, "Output directory");
  ablate_o.add_to(ab);

  CLI::App* sp = app.add_subcommand("split", "Speaker-disjoint train/test split");
  sp->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  sp->add_option("--fraction", split_fraction, "Target test fraction of utterances")->capture_default_str();
  sp->add_option("--seed", split_seed, "Shuffle seed")->capture_default_str();
  sp->add_option("--out", out, "Output directory");

  CLI::App* gr = app.add_subcommand("grid", "Grid search over hyperparameters");
  gr->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  gr->add_option("--grid", grid_path, "JSON object mapping axis names to value lists")
      ->required()
      ->check(CLI::ExistingFile);
  gr->add_option("--out", out, "Output directory");
  grid_o.add_to(gr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) return cmd_generate(spec_path, gen_seed, out);
    if (*tr) return cmd_train(train_o, corpus_dir, out);
    if (*ev) return cmd_eval(checkpoint_path, corpus_dir, report_path, attention_path, histogram_path);
    if (*ab) return cmd_ablate(ablate_o, corpus_dir, test_dir, seeds_text, out);
    if (*sp) return cmd_split(corpus_dir, split_fraction, split_seed, out);
    if (*gr) return cmd_grid(grid_o, corpus_dir, grid_path, out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::invalid_argument& e) {  // ShapeError and malformed values
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
