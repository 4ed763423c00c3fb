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

#include "dialoguernn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dialoguernn/format.hpp"
#include "json.hpp"

namespace drnn {

ClassificationReport classification_metrics(std::span<const std::size_t> predicted,
                                            std::span<const std::size_t> truth,
                                            std::size_t classes) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("classification_metrics: " + std::to_string(predicted.size()) +
                                " predictions for " + std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) throw std::invalid_argument("classification_metrics: no samples");
  ClassificationReport r;
  r.count = truth.size();
  r.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= classes || predicted[i] >= classes) {
      throw std::invalid_argument("classification_metrics: label outside [0," +
                                  std::to_string(classes) + ") at sample " + std::to_string(i));
    }
    ++r.confusion[truth[i]][predicted[i]];
  }
  r.per_class.resize(classes);
  double weighted_recall = 0.0, weighted_f1 = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    ClassMetrics& m = r.per_class[c];
    const std::size_t tp = r.confusion[c][c];
    for (std::size_t k = 0; k < classes; ++k) {
      m.support += r.confusion[c][k];
      m.predicted += r.confusion[k][c];
    }
    if (m.support > 0) m.accuracy = static_cast<double>(tp) / static_cast<double>(m.support);
    if (m.predicted > 0) m.precision = static_cast<double>(tp) / static_cast<double>(m.predicted);
    if (m.support > 0 || m.predicted > 0) {
      const double p = m.precision.value_or(0.0);
      const double rec = m.accuracy.value_or(0.0);
      m.f1 = (p + rec) > 0.0 ? 2.0 * p * rec / (p + rec) : 0.0;
    }
    const double w = static_cast<double>(m.support);
    weighted_recall += w * m.accuracy.value_or(0.0);
    weighted_f1 += w * m.f1.value_or(0.0);
  }
  r.weighted_accuracy = weighted_recall / static_cast<double>(r.count);
  r.weighted_f1 = weighted_f1 / static_cast<double>(r.count);
  return r;
}

RegressionReport regression_metrics(const std::vector<std::vector<double>>& predictions,
                                    const std::vector<std::vector<double>>& targets) {
  if (predictions.size() != targets.size()) {
    throw std::invalid_argument("regression_metrics: " + std::to_string(predictions.size()) +
                                " predictions for " + std::to_string(targets.size()) + " targets");
  }
  if (targets.empty()) throw std::invalid_argument("regression_metrics: no samples");
  const std::size_t k = targets.front().size();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].size() != k || predictions[i].size() != k) {
      throw std::invalid_argument("regression_metrics: sample " + std::to_string(i) +
                                  " has mismatched attribute count");
    }
  }
  RegressionReport r;
  r.count = targets.size();
  r.attributes.resize(k);
  for (std::size_t a = 0; a < k; ++a) {
    // Welford running moments.
    double mean_x = 0.0, mean_y = 0.0, m2x = 0.0, m2y = 0.0, cxy = 0.0, abs_sum = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const double x = predictions[i][a], y = targets[i][a];
      abs_sum += std::fabs(x - y);
      const double n = static_cast<double>(i + 1);
      const double dx = x - mean_x;
      const double dy = y - mean_y;
      mean_x += dx / n;
      mean_y += dy / n;
      m2x += dx * (x - mean_x);
      m2y += dy * (y - mean_y);
      cxy += dx * (y - mean_y);
    }
    AttributeMetrics& m = r.attributes[a];
    m.mae = abs_sum / static_cast<double>(r.count);
    if (r.count >= 2 && m2x > 0.0 && m2y > 0.0) {
      m.pearson = std::clamp(cxy / std::sqrt(m2x * m2y), -1.0, 1.0);
    }
    r.mean_mae += m.mae;
  }
  r.mean_mae /= static_cast<double>(k == 0 ? 1 : k);
  return r;
}

std::vector<bool> shift_turns(const Dialogue& dialogue) {
  std::vector<bool> out(dialogue.size(), false);
  std::vector<std::optional<std::size_t>> last;
  for (std::size_t t = 0; t < dialogue.size(); ++t) {
    const Utterance& u = dialogue.utterances[t];
    if (u.speaker >= last.size()) last.resize(u.speaker + 1);
    if (u.label && last[u.speaker] && *last[u.speaker] != *u.label) out[t] = true;
    if (u.label) last[u.speaker] = u.label;
  }
  return out;
}

ShiftAccuracy emotion_shift_accuracy(std::span<const Dialogue> dialogues,
                                     const std::vector<std::vector<std::size_t>>& predictions) {
  if (predictions.size() != dialogues.size()) {
    throw std::invalid_argument("emotion_shift_accuracy: prediction count does not match dialogues");
  }
  ShiftAccuracy s;
  std::size_t shift_hits = 0, stay_hits = 0;
  for (std::size_t d = 0; d < dialogues.size(); ++d) {
    const Dialogue& dlg = dialogues[d];
    if (predictions[d].size() != dlg.size()) {
      throw std::invalid_argument("emotion_shift_accuracy: dialogue '" + dlg.id +
                                  "' prediction length mismatch");
    }
    const std::vector<bool> shifts = shift_turns(dlg);
    for (std::size_t t = 0; t < dlg.size(); ++t) {
      const bool hit = dlg.utterances[t].label && predictions[d][t] == *dlg.utterances[t].label;
      if (shifts[t]) {
        ++s.shift_turns;
        shift_hits += hit;
      } else {
        ++s.no_shift_turns;
        stay_hits += hit;
      }
    }
  }
  if (s.shift_turns) s.shift = static_cast<double>(shift_hits) / static_cast<double>(s.shift_turns);
  if (s.no_shift_turns) {
    s.no_shift = static_cast<double>(stay_hits) / static_cast<double>(s.no_shift_turns);
  }
  return s;
}

std::optional<std::size_t> attended_context(std::span<const double> row,
                                            std::optional<std::size_t> self) {
  if (row.size() < 2) return std::nullopt;
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (self && j == *self) continue;
    if (!best || row[j] > row[*best]) best = j;
  }
  return best;
}

DistanceHistogram attention_distance_histogram(std::span<const ForwardTrace> traces,
                                               std::span<const Dialogue> dialogues,
                                               std::size_t bucket_width) {
  if (bucket_width == 0) throw std::invalid_argument("bucket width must be >= 1");
  if (traces.size() != dialogues.size()) {
    throw std::invalid_argument("attention_distance_histogram: trace/dialogue count mismatch");
  }
  DistanceHistogram h;
  h.bucket_width = bucket_width;
  for (std::size_t d = 0; d < traces.size(); ++d) {
    const ForwardTrace& tr = traces[d];
    for (std::size_t t = 0; t < tr.steps.size(); ++t) {
      const auto& label = dialogues[d].utterances.at(t).label;
      if (!label || !tr.steps[t].predicted || *tr.steps[t].predicted != *label) continue;
      std::optional<std::size_t> j;
      if (!tr.beta.empty()) {
        j = attended_context(tr.beta.at(t), t);
      } else {
        j = attended_context(tr.steps[t].alpha, std::nullopt);
      }
      if (!j) continue;
      const std::size_t dist = *j > t ? *j - t : t - *j;
      const std::size_t bucket = dist / bucket_width;
      if (bucket >= h.counts.size()) h.counts.resize(bucket + 1, 0);
      ++h.counts[bucket];
      ++h.samples;
    }
  }
  return h;
}

std::vector<AttentionRow> attention_rows(std::span<const ForwardTrace> traces) {
  std::vector<AttentionRow> rows;
  for (const ForwardTrace& tr : traces) {
    for (std::size_t t = 0; t < tr.steps.size(); ++t) {
      const auto& alpha = tr.steps[t].alpha;
      for (std::size_t j = 0; j < alpha.size(); ++j) {
        rows.push_back({tr.dialogue_id, t, j, alpha[j], "alpha"});
      }
    }
    for (std::size_t t = 0; t < tr.beta.size(); ++t) {
      for (std::size_t j = 0; j < tr.beta[t].size(); ++j) {
        rows.push_back({tr.dialogue_id, t, j, tr.beta[t][j], "beta"});
      }
    }
  }
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

void export_attention(std::span<const ForwardTrace> traces, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "dialogue_id,t,source_index,weight,kind\n";
  for (const AttentionRow& r : attention_rows(traces)) {
    out << csv_field(r.dialogue_id) << ',' << r.t << ',' << r.source_index << ','
        << format_double(r.weight) << ',' << r.kind << '\n';
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<AttentionRow> import_attention(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::string line;
  std::getline(in, line);
  if (line != "dialogue_id,t,source_index,weight,kind") {
    throw std::runtime_error("'" + path + "' is not an attention export (bad header)");
  }
  std::vector<AttentionRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 5 fields");
    }
    rows.push_back({f[0], std::stoul(f[1]), std::stoul(f[2]), parse_double(f[3]), f[4]});
  }
  return rows;
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string report_json(const ClassificationReport& report,
                        const std::vector<std::string>& class_names) {
  nlohmann::json j;
  j["kind"] = "classification";
  j["count"] = report.count;
  j["weighted_accuracy"] = report.weighted_accuracy;
  j["weighted_f1"] = report.weighted_f1;
  j["confusion"] = report.confusion;
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const ClassMetrics& m = report.per_class[c];
    classes.push_back({{"name", c < class_names.size() ? class_names[c] : std::to_string(c)},
                       {"support", m.support},
                       {"predicted", m.predicted},
                       {"accuracy", optional_number(m.accuracy)},
                       {"precision", optional_number(m.precision)},
                       {"f1", optional_number(m.f1)}});
  }
  j["classes"] = classes;
  if (report.shift) {
    j["emotion_shift"] = {{"shift_accuracy", optional_number(report.shift->shift)},
                          {"no_shift_accuracy", optional_number(report.shift->no_shift)},
                          {"shift_turns", report.shift->shift_turns},
                          {"no_shift_turns", report.shift->no_shift_turns}};
  }
  return j.dump(2) + "\n";
}

std::string report_json(const RegressionReport& report,
                        const std::vector<std::string>& attribute_names) {
  nlohmann::json j;
  j["kind"] = "regression";
  j["count"] = report.count;
  j["mean_mae"] = report.mean_mae;
  nlohmann::json attrs = nlohmann::json::array();
  for (std::size_t a = 0; a < report.attributes.size(); ++a) {
    attrs.push_back(
        {{"name", a < attribute_names.size() ? attribute_names[a] : std::to_string(a)},
         {"mae", report.attributes[a].mae},
         {"pearson_r", optional_number(report.attributes[a].pearson)}});
  }
  j["attributes"] = attrs;
  return j.dump(2) + "\n";
}

}  // namespace drnn
