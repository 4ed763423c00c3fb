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
#include <span>
#include <string>
#include <vector>

#include "dialoguernn/dialogue.hpp"
#include "dialoguernn/metrics.hpp"
#include "dialoguernn/model.hpp"
#include "dialoguernn/training.hpp"

namespace drnn {

/// Forward pass over every dialogue, in corpus order.
std::vector<ForwardTrace> predict_corpus(const Corpus& corpus, const Parameters& params,
                                         const ModelConfig& config);

/// Flattened predicted labels and true labels, corpus order.
std::vector<std::size_t> predicted_labels(std::span<const ForwardTrace> traces);
std::vector<std::size_t> true_labels(const Corpus& corpus);

/// Classification report with the emotion-shift pair filled in.
ClassificationReport evaluate_classification(const Corpus& corpus,
                                             std::span<const ForwardTrace> traces);
RegressionReport evaluate_regression(const Corpus& corpus, std::span<const ForwardTrace> traces);

/// Weighted F1 (classification) or mean MAE (regression).
double selection_metric(const Corpus& corpus, std::span<const ForwardTrace> traces);

struct AblationRow {
  std::string configuration;  // "full", "no-party-state", "no-emotion-gru"
  std::vector<double> weighted_f1;  // one per seed, test split
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single seed
};

std::vector<std::string> ablation_configurations();
ModelConfig ablated(const ModelConfig& base, const std::string& configuration);

/// Trains every configuration once per seed and scores it on `test`.
/// `validation` may be null (last-epoch parameters are scored then).
std::vector<AblationRow> ablation_run(const Corpus& train_set, const Corpus* validation,
                                      const Corpus& test, const ModelConfig& base,
                                      const TrainConfig& config,
                                      std::span<const std::uint64_t> seeds,
                                      std::size_t workers = 1);

/// Mean and sample standard deviation.
std::pair<double, double> mean_sd(std::span<const double> values);

}  // namespace drnn
