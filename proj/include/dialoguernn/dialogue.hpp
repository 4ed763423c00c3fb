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
#include <string>
#include <vector>

namespace drnn {

enum class TaskMode { kClassification, kRegression };

std::string to_string(TaskMode mode);
TaskMode task_mode_from_string(const std::string& s);

struct Utterance {
  std::size_t speaker = 0;  // party index within the dialogue
  std::vector<double> features;
  std::optional<std::size_t> label;            // classification corpora
  std::optional<std::vector<double>> targets;  // regression corpora
  /// One cue vector per party, used by the listener GRU. Empty when absent.
  std::vector<std::vector<double>> listener_cues;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Dialogue {
  std::string id;
  /// Global speaker identity of each party, used for speaker-disjoint splits.
  std::vector<std::string> speakers;
  std::vector<Utterance> utterances;

  std::size_t size() const noexcept { return utterances.size(); }
  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

struct CorpusManifest {
  TaskMode mode = TaskMode::kClassification;
  std::size_t feature_dim = 0;
  std::vector<std::string> class_names;      // classification
  std::vector<std::string> attribute_names;  // regression
  std::size_t parties = 2;
  std::size_t listener_cue_dim = 0;  // 0 when the corpus carries no cues
  std::size_t dialogue_count = 0;
  std::size_t utterance_count = 0;

  std::size_t output_dim() const {
    return mode == TaskMode::kClassification ? class_names.size() : attribute_names.size();
  }
  friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

struct Corpus {
  CorpusManifest manifest;
  std::vector<Dialogue> dialogues;

  std::size_t utterance_count() const;
  /// Recomputes manifest counts from the dialogues.
  void refresh_counts();
  friend bool operator==(const Corpus&, const Corpus&) = default;
};

}  // namespace drnn
