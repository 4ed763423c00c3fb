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

#include "dialoguernn/evaluation.hpp"

#include <cmath>

#include "dialoguernn/errors.hpp"
#include "parallel.hpp"

namespace drnn {

std::vector<ForwardTrace> predict_corpus(const Corpus& corpus, const Parameters& params,
                                         const ModelConfig& config) {
  std::vector<ForwardTrace> traces;
  traces.reserve(corpus.dialogues.size());
  for (const Dialogue& d : corpus.dialogues) traces.push_back(forward_dialogue(d, params, config));
  return traces;
}

std::vector<std::size_t> predicted_labels(std::span<const ForwardTrace> traces) {
  std::vector<std::size_t> out;
  for (const ForwardTrace& tr : traces) {
    for (const UtteranceTrace& s : tr.steps) {
      if (!s.predicted) throw std::invalid_argument("trace '" + tr.dialogue_id + "' has no labels");
      out.push_back(*s.predicted);
    }
  }
  return out;
}

std::vector<std::size_t> true_labels(const Corpus& corpus) {
  std::vector<std::size_t> out;
  for (const Dialogue& d : corpus.dialogues) {
    for (std::size_t t = 0; t < d.size(); ++t) {
      if (!d.utterances[t].label) {
        throw ValidationError("dialogue '" + d.id + "' utterance " + std::to_string(t) +
                              " has no label");
      }
      out.push_back(*d.utterances[t].label);
    }
  }
  return out;
}

ClassificationReport evaluate_classification(const Corpus& corpus,
                                             std::span<const ForwardTrace> traces) {
  if (traces.size() != corpus.dialogues.size()) {
    throw std::invalid_argument("evaluate_classification: trace/dialogue count mismatch");
  }
  ClassificationReport report = classification_metrics(
      predicted_labels(traces), true_labels(corpus), corpus.manifest.class_names.size());
  std::vector<std::vector<std::size_t>> per_dialogue;
  for (const ForwardTrace& tr : traces) per_dialogue.push_back(predicted_labels({&tr, 1}));
  report.shift = emotion_shift_accuracy(corpus.dialogues, per_dialogue);
  return report;
}

RegressionReport evaluate_regression(const Corpus& corpus, std::span<const ForwardTrace> traces) {
  if (traces.size() != corpus.dialogues.size()) {
    throw std::invalid_argument("evaluate_regression: trace/dialogue count mismatch");
  }
  std::vector<std::vector<double>> predictions, targets;
  for (std::size_t d = 0; d < traces.size(); ++d) {
    const Dialogue& dlg = corpus.dialogues[d];
    for (std::size_t t = 0; t < dlg.size(); ++t) {
      if (!dlg.utterances[t].targets) {
        throw ValidationError("dialogue '" + dlg.id + "' utterance " + std::to_string(t) +
                              " has no targets");
      }
      predictions.push_back(traces[d].steps.at(t).output);
      targets.push_back(*dlg.utterances[t].targets);
    }
  }
  return regression_metrics(predictions, targets);
}

double selection_metric(const Corpus& corpus, std::span<const ForwardTrace> traces) {
  if (corpus.manifest.mode == TaskMode::kClassification) {
    return classification_metrics(predicted_labels(traces), true_labels(corpus),
                                  corpus.manifest.class_names.size())
        .weighted_f1;
  }
  return evaluate_regression(corpus, traces).mean_mae;
}

std::vector<std::string> ablation_configurations() {
  return {"full", "no-party-state", "no-emotion-gru"};
}

ModelConfig ablated(const ModelConfig& base, const std::string& configuration) {
  ModelConfig c = base;
  if (configuration == "full") return c;
  if (configuration == "no-party-state") {
    c.party_state = false;
    c.listener = ListenerUpdate::kIdentity;
    return c;
  }
  if (configuration == "no-emotion-gru") {
    c.emotion_gru = false;
    return c;
  }
  throw ValidationError("unknown ablation '" + configuration + "'");
}

std::pair<double, double> mean_sd(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

std::vector<AblationRow> ablation_run(const Corpus& train_set, const Corpus* validation,
                                      const Corpus& test, const ModelConfig& base,
                                      const TrainConfig& config,
                                      std::span<const std::uint64_t> seeds, std::size_t workers) {
  if (base.mode != TaskMode::kClassification) {
    throw ValidationError("ablation runs need a classification corpus");
  }
  if (seeds.empty()) throw ValidationError("ablation run needs at least one seed");
  const std::vector<std::string> names = ablation_configurations();
  std::vector<AblationRow> rows(names.size());
  for (std::size_t c = 0; c < names.size(); ++c) {
    rows[c].configuration = names[c];
    rows[c].weighted_f1.resize(seeds.size());
  }
  detail::run_indexed(names.size() * seeds.size(), workers, [&](std::size_t i) {
    const std::size_t c = i / seeds.size(), s = i % seeds.size();
    const ModelConfig model = ablated(base, names[c]);
    TrainConfig tc = config;
    tc.seed = seeds[s];
    TrainResult r = train(train_set, validation, model, tc);
    rows[c].weighted_f1[s] =
        evaluate_classification(test, predict_corpus(test, r.parameters, model)).weighted_f1;
  });
  for (AblationRow& row : rows) std::tie(row.mean, row.sd) = mean_sd(row.weighted_f1);
  return rows;
}

}  // namespace drnn
