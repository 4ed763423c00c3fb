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

// On-disk corpus: a manifest (JSON object) plus a data file with one
// dialogue per line (JSON Lines). Field reference in README.md.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dialoguernn/dialogue.hpp"

namespace drnn {

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kDialoguesFile = "dialogues.jsonl";

/// Every broken invariant, each naming the dialogue id and utterance index.
std::vector<std::string> validate_corpus(const Corpus& corpus);

/// Throws ValidationError listing every violation (parse errors included),
/// std::runtime_error naming the path when a file cannot be opened.
Corpus load_and_validate(const std::string& data_path, const std::string& manifest_path);
/// Loads <dir>/manifest.json and <dir>/dialogues.jsonl.
Corpus load_corpus_dir(const std::string& dir);

void save_corpus(const Corpus& corpus, const std::string& data_path,
                 const std::string& manifest_path);
/// Creates the directory if needed.
void save_corpus_dir(const Corpus& corpus, const std::string& dir);

struct SplitResult {
  Corpus train;
  Corpus test;
  double achieved_fraction = 0.0;  // test utterances / all utterances
  std::vector<std::string> test_speakers;
};

/// Speakers who share a dialogue must land on the same side, so the unit of
/// assignment is a connected group of speakers. Groups are visited in seeded
/// order and moved to test until the test utterance fraction reaches the
/// target. Throws ValidationError when no split leaves both sides nonempty.
SplitResult speaker_disjoint_split(const Corpus& corpus, double test_fraction, std::uint64_t seed);

/// Plain seeded dialogue-level holdout (the validation slice of a train
/// split). round(fraction·n) dialogues, at least one when fraction > 0.
std::pair<Corpus, Corpus> holdout_split(const Corpus& corpus, double fraction, std::uint64_t seed);

/// Concatenates per-utterance features in the given modality order. The
/// first corpus supplies labels, targets and listener cues.
Corpus fuse_modalities(std::span<const Corpus> modalities);

struct SyntheticSpec {
  std::size_t parties = 2;
  std::size_t dialogues = 125;
  std::size_t min_length = 8;
  std::size_t max_length = 16;
  std::size_t classes = 6;
  std::size_t feature_dim = 16;
  double p_self = 0.7;
  double p_other = 0.2;
  double noise = 1.0;          // σ
  double mean_scale = 0.35;    // class-mean entries ~ N(0, mean_scale²)
  double offset_scale = 0.5;   // speaker-offset entries ~ N(0, offset_scale²)
  std::size_t speaker_groups = 5;  // disjoint speaker sets, dialogue d uses set d mod groups
  std::uint64_t seed = 0;

  /// Throws ValidationError listing every violated constraint.
  void validate() const;
  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

SyntheticSpec synthetic_spec_from_json(const std::string& text);
std::string synthetic_spec_to_json(const SyntheticSpec& spec);

/// Labels per party follow: keep own previous label with p_self, copy the
/// most recent other-party label with p_other, otherwise uniform (a party's
/// first label is uniform). Features are class mean + speaker offset +
/// N(0, σ²) noise. Speakers alternate, party 0 first.
Corpus generate_synthetic(const SyntheticSpec& spec);

/// Arithmetic mean of the samples whose timestamp lies in [start, end), per
/// span; nullopt for spans that contain no sample.
std::vector<std::optional<std::vector<double>>> average_over_spans(
    std::span<const double> timestamps, const std::vector<std::vector<double>>& samples,
    std::span<const std::pair<double, double>> spans);

}  // namespace drnn
