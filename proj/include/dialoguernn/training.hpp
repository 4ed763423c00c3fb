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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dialoguernn/dialogue.hpp"
#include "dialoguernn/model.hpp"

namespace drnn {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double l2 = 1e-4;  // λ, applied as λ·Σθ²
  std::size_t epochs = 60;
  std::uint64_t seed = 0;  // parameter init and per-epoch shuffling
  std::optional<std::size_t> patience;  // epochs without validation improvement
  bool record_wall_time = false;        // off keeps epoch logs byte-reproducible

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// ------------------------------------------------------------------ losses

/// Probability floor used when the true-class probability underflows.
inline constexpr double kProbabilityFloor = 1e-12;

struct LossValue {
  double value = 0.0;
  std::size_t clamped = 0;  // utterances whose P[y] was raised to the floor
};

/// Mean negative log-likelihood over all utterances plus λ·Σθ².
LossValue classification_loss(const std::vector<std::vector<double>>& probabilities,
                              std::span<const std::size_t> labels, const Parameters& params,
                              double lambda, bool clamp = true);
/// Same, reading probabilities from traces and labels from the dialogues.
LossValue classification_loss(std::span<const ForwardTrace> traces,
                              std::span<const Dialogue> dialogues, const Parameters& params,
                              double lambda, bool clamp = true);

/// Mean absolute error over all utterances and attributes plus λ·Σθ².
double regression_loss(const std::vector<std::vector<double>>& predictions,
                       const std::vector<std::vector<double>>& targets, const Parameters& params,
                       double lambda);

struct TapeLoss {
  Var total;
  double data_term = 0.0;
  std::size_t clamped = 0;
};

/// Loss of one dialogue (the training batch) recorded on the tape: the mean
/// per-utterance data term plus λ·Σθ² over the bound parameters.
TapeLoss dialogue_loss(Tape& tape, const DialogueGraph& graph, const Dialogue& dialogue,
                       const BoundParameters& params, const ModelConfig& config, double lambda,
                       bool clamp = true);

// ------------------------------------------------------------------ Adam

struct AdamState {
  Parameters first_moment;
  Parameters second_moment;
  std::uint64_t step = 0;

  static AdamState like(const Parameters& params);
};

struct AdamStepResult {
  bool applied = true;
  std::string rejected_parameter;  // first table holding a non-finite gradient
};

/// Bias-corrected Adam. A non-finite gradient anywhere rejects the whole
/// step: parameters, moments and the step counter stay untouched.
AdamStepResult adam_step(Parameters& params, const Parameters& grads, AdamState& state,
                         const TrainConfig& config);

// ------------------------------------------------------------------ loop

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> val_metric;  // weighted F1 or mean MAE
  double wall_ms = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

/// Called after every epoch with the current parameters; return false to stop.
using EpochCallback = std::function<bool(const EpochRecord&, const Parameters&)>;

struct TrainResult {
  Parameters parameters;        // best validation epoch, or last epoch without validation
  Parameters final_parameters;  // after the last completed epoch
  std::size_t best_epoch = 0;   // 0 means the initialization
  std::vector<EpochRecord> epochs;
  std::vector<std::string> log;  // clamped probabilities, rejected steps
};

/// Batch = one dialogue, visited in a seeded shuffle each epoch. Throws
/// ValidationError when corpus and model disagree, and rethrows forward
/// errors prefixed with the dialogue id.
TrainResult train(const Corpus& train_set, const Corpus* validation, const ModelConfig& model,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});
TrainResult train_from(Parameters init, const Corpus& train_set, const Corpus* validation,
                       const ModelConfig& model, const TrainConfig& config,
                       const EpochCallback& on_epoch = {});

/// CSV header and row for the per-epoch log.
std::string epoch_csv_header();
std::string epoch_csv_row(const EpochRecord& record);

// ------------------------------------------------------------------ grid

struct GridAxis {
  std::string name;  // see grid_axis_names()
  std::vector<double> values;
};

std::vector<std::string> grid_axis_names();

struct GridTrial {
  std::size_t grid_index = 0;  // position in the Cartesian enumeration
  std::vector<std::pair<std::string, double>> assignment;
  ModelConfig model;
  TrainConfig train;
  double metric = 0.0;
  std::vector<ForwardTrace> predictions;  // validation traces of the returned parameters
};

struct GridResult {
  std::vector<GridTrial> ranked;
  bool higher_is_better = true;
};

/// One training run per grid point, the last axis varying fastest. Ranked by
/// validation weighted F1 (descending) or mean MAE (ascending); ties keep
/// grid order. Trials may run on `workers` threads without changing results.
GridResult grid_search(const Corpus& train_set, const Corpus& validation,
                       const ModelConfig& model, const TrainConfig& config,
                       const std::vector<GridAxis>& grid, std::size_t workers = 1);

}  // namespace drnn
