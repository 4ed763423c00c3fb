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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dialoguernn/dialogue.hpp"
#include "dialoguernn/model.hpp"

namespace drnn {

// Undefined quantities (zero-support F1, zero-variance r, no shift turns) are
// std::nullopt, never a sentinel number.

struct ClassMetrics {
  std::size_t support = 0;
  std::size_t predicted = 0;
  std::optional<double> accuracy;   // recall of this class
  std::optional<double> precision;
  std::optional<double> f1;         // nullopt only when never true and never predicted
};

struct ShiftAccuracy {
  std::optional<double> shift;
  std::optional<double> no_shift;
  std::size_t shift_turns = 0;
  std::size_t no_shift_turns = 0;
};

struct ClassificationReport {
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<ClassMetrics> per_class;
  std::size_t count = 0;
  double weighted_accuracy = 0.0;  // support-weighted recall, equals plain accuracy
  double weighted_f1 = 0.0;
  std::optional<ShiftAccuracy> shift;
};

struct AttributeMetrics {
  double mae = 0.0;
  std::optional<double> pearson;
};

struct RegressionReport {
  std::vector<AttributeMetrics> attributes;
  std::size_t count = 0;
  double mean_mae = 0.0;
};

/// Throws std::invalid_argument on length mismatch, empty input or a label
/// outside [0, classes).
ClassificationReport classification_metrics(std::span<const std::size_t> predicted,
                                            std::span<const std::size_t> truth,
                                            std::size_t classes);

/// Rows are samples, columns attributes. Needs at least one sample; Pearson r
/// needs two and non-zero variance on both sides.
RegressionReport regression_metrics(const std::vector<std::vector<double>>& predictions,
                                    const std::vector<std::vector<double>>& targets);

/// A turn is a shift turn when the same party's previous turn in the dialogue
/// carries a different true label. A party's first turn is a no-shift turn.
std::vector<bool> shift_turns(const Dialogue& dialogue);

ShiftAccuracy emotion_shift_accuracy(std::span<const Dialogue> dialogues,
                                     const std::vector<std::vector<std::size_t>>& predictions);

/// Position the target utterance depends on most, other than itself: the
/// highest weight in the row excluding `self` (ties → lowest index). Rows with
/// fewer than two entries yield nullopt.
std::optional<std::size_t> attended_context(std::span<const double> row,
                                            std::optional<std::size_t> self);

struct DistanceHistogram {
  std::size_t bucket_width = 1;
  std::vector<std::size_t> counts;  // counts[k] covers distances [k·w, (k+1)·w)
  std::size_t samples = 0;
};

/// Over correctly predicted utterances: |t − attended_context(row)| using the
/// β row when present, otherwise the α row over the history.
DistanceHistogram attention_distance_histogram(std::span<const ForwardTrace> traces,
                                               std::span<const Dialogue> dialogues,
                                               std::size_t bucket_width = 1);

struct AttentionRow {
  std::string dialogue_id;
  std::size_t t = 0;
  std::size_t source_index = 0;
  double weight = 0.0;
  std::string kind;  // "alpha" or "beta"

  friend bool operator==(const AttentionRow&, const AttentionRow&) = default;
};

std::vector<AttentionRow> attention_rows(std::span<const ForwardTrace> traces);
/// CSV: dialogue_id,t,source_index,weight,kind. Throws std::runtime_error
/// naming the path on I/O failure.
void export_attention(std::span<const ForwardTrace> traces, const std::string& path);
std::vector<AttentionRow> import_attention(const std::string& path);

/// Stable-keyed JSON text for CI diffing.
std::string report_json(const ClassificationReport& report,
                        const std::vector<std::string>& class_names);
std::string report_json(const RegressionReport& report,
                        const std::vector<std::string>& attribute_names);

}  // namespace drnn
