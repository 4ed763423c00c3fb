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

// Drives the command-line binary end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <map>
#include <sstream>

#include "dialoguernn/checkpoint.hpp"
#include "dialoguernn/corpus.hpp"
#include "dialoguernn/metrics.hpp"
#include "json.hpp"
#include "support/temp_dir.hpp"

#ifndef DIALOGUERNN_BINARY
#error "DIALOGUERNN_BINARY must name the CLI executable"
#endif

namespace drnn {
namespace {

using testing::slurp;
using testing::spit;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    spit(file("spec.json"),
         R"({"dialogues": 12, "classes": 3, "feature_dim": 4, "min_length": 3, "max_length": 6})");
    spit(file("config.json"),
         R"({"model": {"global_dim": 4, "party_dim": 4, "emotion_dim": 4, "hidden_dim": 4},
             "train": {"epochs": 2}})");
    ASSERT_EQ(run("generate --spec " + file("spec.json") + " --out " + file("corpus")), 0);
  }

  std::string file(const std::string& name) const { return dir_.file(name); }

  // Exit status of the binary; stdout and stderr land in out.txt / err.txt.
  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + DIALOGUERNN_BINARY + " " + args + " >" + file("out.txt") +
                            " 2>" + file("err.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string train_args(const std::string& out) const {
    return "train --corpus " + file("corpus") + " --config " + file("config.json") + " --out " + file(out);
  }

  testing::TempDir dir_;
};

TEST_F(Cli, GenerateIsDeterministicAndValid) {
  ASSERT_EQ(run("generate --spec " + file("spec.json") + " --out " + file("again")), 0);
  EXPECT_EQ(slurp(file("again/dialogues.jsonl")), slurp(file("corpus/dialogues.jsonl")));
  EXPECT_EQ(slurp(file("again/manifest.json")), slurp(file("corpus/manifest.json")));
  EXPECT_EQ(load_corpus_dir(file("corpus")).dialogues.size(), 12u);
  ASSERT_EQ(run("generate --spec " + file("spec.json") + " --seed 3 --out " + file("other")), 0);
  EXPECT_NE(slurp(file("other/dialogues.jsonl")), slurp(file("corpus/dialogues.jsonl")));
}

TEST_F(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(run("generate --out " + file("x")), 1);
  EXPECT_EQ(run("train"), 1);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, TrainWritesCheckpointLogAndResolvedConfig) {
  ASSERT_EQ(run(train_args("a") + " --seed 5"), 0) << slurp(file("err.txt"));
  ASSERT_EQ(run(train_args("b") + " --seed 5"), 0);
  EXPECT_EQ(slurp(file("a/checkpoint.json")), slurp(file("b/checkpoint.json")));
  EXPECT_EQ(slurp(file("a/epochs.csv")), slurp(file("b/epochs.csv")));
  EXPECT_NE(slurp(file("a/config.json")).find("corpus"), std::string::npos);
  const auto echo = nlohmann::json::parse(slurp(file("a/config.json")));
  EXPECT_EQ(echo["train"]["seed"], 5);
  EXPECT_EQ(echo["model"]["feature_dim"], 4);  // filled in from the manifest
  const std::string log = slurp(file("a/epochs.csv"));
  EXPECT_EQ(log.substr(0, log.find('\n')), "epoch,train_loss,val_metric,wall_ms");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 3);
}

TEST_F(Cli, ZeroEpochRunWritesTheInitialization) {
  ASSERT_EQ(run(train_args("init") + " --epochs 0 --seed 9"), 0);
  const Checkpoint cp = load_checkpoint(file("init/checkpoint.json"));
  EXPECT_EQ(checkpoint_json(cp.config, cp.parameters),
            checkpoint_json(cp.config, make_parameters(cp.config, 9)));
}

TEST_F(Cli, VariantFlagSelectsTheNamedConfigurations) {
  const std::map<std::string, std::tuple<bool, bool, std::string>> expect{
      {"base", {false, false, "identity"}},
      {"l", {false, false, "gru"}},
      {"bi", {true, false, "identity"}},
      {"att", {false, true, "identity"}},
      {"bi+att", {true, true, "identity"}}};
  for (const auto& [variant, flags] : expect) {
    ASSERT_EQ(run(train_args(variant) + " --epochs 0 --variant " + variant), 0) << variant;
    const Checkpoint cp = load_checkpoint(file(variant + "/checkpoint.json"));
    EXPECT_EQ(cp.config.bidirectional, std::get<0>(flags)) << variant;
    EXPECT_EQ(cp.config.emotion_attention, std::get<1>(flags)) << variant;
    EXPECT_EQ(to_string(cp.config.listener), std::get<2>(flags)) << variant;
  }
  EXPECT_EQ(run(train_args("bad") + " --variant tri"), 2);
}

TEST_F(Cli, EvalReportIsStableAndAttentionRowsSumToOne) {
  ASSERT_EQ(run(train_args("m") + " --variant bi+att"), 0);
  const std::string base = "eval --checkpoint " + file("m/checkpoint.json") + " --corpus " + file("corpus");
  ASSERT_EQ(run(base + " --report " + file("r1.json") + " --export-attention " + file("att.csv")), 0)
      << slurp(file("err.txt"));
  ASSERT_EQ(run(base + " --report " + file("r2.json")), 0);
  EXPECT_EQ(slurp(file("r1.json")), slurp(file("r2.json")));
  const auto report = nlohmann::json::parse(slurp(file("r1.json")));
  for (const char* key : {"kind", "count", "weighted_accuracy", "weighted_f1", "confusion", "classes",
                          "emotion_shift"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
  std::map<std::tuple<std::string, std::size_t, std::string>, double> sums;
  for (const AttentionRow& r : import_attention(file("att.csv"))) sums[{r.dialogue_id, r.t, r.kind}] += r.weight;
  EXPECT_FALSE(sums.empty());
  for (const auto& [key, sum] : sums) EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST_F(Cli, ShapeMismatchNamesTheDimension) {
  ASSERT_EQ(run(train_args("m") + " --epochs 0"), 0);
  spit(file("spec2.json"), R"({"dialogues": 4, "classes": 3, "feature_dim": 7})");
  ASSERT_EQ(run("generate --spec " + file("spec2.json") + " --out " + file("wide")), 0);
  EXPECT_EQ(run("eval --checkpoint " + file("m/checkpoint.json") + " --corpus " + file("wide")), 2);
  EXPECT_NE(slurp(file("err.txt")).find("feature_dim"), std::string::npos) << slurp(file("err.txt"));
  EXPECT_EQ(run("eval --checkpoint " + file("m/checkpoint.json") + " --corpus " + file("nowhere")), 3);
}

TEST_F(Cli, SplitReportsTheAchievedFraction) {
  ASSERT_EQ(run("split --corpus " + file("corpus") + " --fraction 0.2 --out " + file("sp")), 0);
  EXPECT_NE(slurp(file("out.txt")).find("achieved test fraction"), std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(file("sp/split.json")));
  EXPECT_GE(summary["achieved_fraction"].get<double>(), 0.2);
  const Corpus train = load_corpus_dir(file("sp/train"));
  const Corpus test = load_corpus_dir(file("sp/test"));
  EXPECT_EQ(train.dialogues.size() + test.dialogues.size(), 12u);
}

TEST_F(Cli, AblateOverFiveSeedsTrainsFifteenModels) {
  ASSERT_EQ(run("ablate --corpus " + file("corpus") + " --config " + file("config.json") +
                " --seeds 0..4 --epochs 1 --workers 4 --out " + file("ab")),
            0)
      << slurp(file("err.txt"));
  std::istringstream csv(slurp(file("ab/ablation.csv")));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "configuration,seed0,seed1,seed2,seed3,seed4,mean,sd");
  std::size_t rows = 0, cells = 0;
  while (std::getline(csv, line)) {
    ++rows;
    cells += static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) - 2;
  }
  EXPECT_EQ(rows, 3u);
  EXPECT_EQ(cells, 15u);
}

TEST_F(Cli, GridTableHasOneRowPerTrial) {
  spit(file("grid.json"), R"({"learning_rate": [0.001, 0.01, 0.1], "hidden_dim": [3, 5]})");
  ASSERT_EQ(run("grid --corpus " + file("corpus") + " --config " + file("config.json") + " --grid " +
                file("grid.json") + " --epochs 1 --out " + file("g")),
            0)
      << slurp(file("err.txt"));
  const std::string csv = slurp(file("g/grid.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "rank,grid_index,learning_rate,hidden_dim,weighted_f1");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  spit(file("bad_grid.json"), R"({"momentum": [0.9]})");
  EXPECT_EQ(run("grid --corpus " + file("corpus") + " --grid " + file("bad_grid.json") + " --out " +
                file("g2")),
            2);
}

TEST_F(Cli, DefaultRunDirectoryUsesTheEnvironmentRoot) {
  ASSERT_EQ(run("train --corpus " + file("corpus") + " --config " + file("config.json") +
                    " --epochs 0 --seed 42",
                "DIALOGUERNN_OUT_ROOT=" + file("root")),
            0);
  std::size_t found = 0;
  for (const auto& entry : std::filesystem::directory_iterator(file("root"))) {
    const std::string name = entry.path().filename().string();
    EXPECT_EQ(name.substr(name.size() - 7), "_seed42");
    EXPECT_TRUE(std::filesystem::exists(entry.path() / "checkpoint.json"));
    ++found;
  }
  EXPECT_EQ(found, 1u);
}

}  // namespace
}  // namespace drnn
