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

#include "dialoguernn/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "dialoguernn/errors.hpp"
#include "json.hpp"

namespace drnn {

using nlohmann::json;

std::size_t Corpus::utterance_count() const {
  std::size_t n = 0;
  for (const Dialogue& d : dialogues) n += d.size();
  return n;
}

void Corpus::refresh_counts() {
  manifest.dialogue_count = dialogues.size();
  manifest.utterance_count = utterance_count();
}

namespace {

std::string where(const Dialogue& d, std::size_t t) {
  return "dialogue '" + d.id + "' utterance " + std::to_string(t);
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::vector<std::string> validate_corpus(const Corpus& corpus) {
  std::vector<std::string> out;
  const CorpusManifest& m = corpus.manifest;
  const bool classification = m.mode == TaskMode::kClassification;
  if (m.feature_dim == 0) out.push_back("manifest: feature_dim must be >= 1");
  if (m.parties < 2) out.push_back("manifest: parties must be >= 2");
  if (classification && m.class_names.size() < 2) {
    out.push_back("manifest: classification needs at least 2 class names");
  }
  if (!classification && m.attribute_names.empty()) {
    out.push_back("manifest: regression needs at least 1 attribute name");
  }
  if (m.dialogue_count != corpus.dialogues.size()) {
    out.push_back("manifest dialogue_count " + std::to_string(m.dialogue_count) +
                  " but data has " + std::to_string(corpus.dialogues.size()));
  }
  if (m.utterance_count != corpus.utterance_count()) {
    out.push_back("manifest utterance_count " + std::to_string(m.utterance_count) +
                  " but data has " + std::to_string(corpus.utterance_count()));
  }
  std::set<std::string> ids;
  for (const Dialogue& d : corpus.dialogues) {
    const std::string name = "dialogue '" + d.id + "'";
    if (d.id.empty()) out.push_back("dialogue with empty id");
    if (!ids.insert(d.id).second) out.push_back(name + ": duplicate id");
    if (d.utterances.empty()) out.push_back(name + ": no utterances");
    if (d.speakers.size() != m.parties) {
      out.push_back(name + ": " + std::to_string(d.speakers.size()) + " speaker ids for " +
                    std::to_string(m.parties) + " parties");
    }
    for (std::size_t t = 0; t < d.size(); ++t) {
      const Utterance& u = d.utterances[t];
      if (u.speaker >= m.parties) {
        out.push_back(where(d, t) + ": speaker " + std::to_string(u.speaker) + " >= parties " +
                      std::to_string(m.parties));
      }
      if (u.features.size() != m.feature_dim) {
        out.push_back(where(d, t) + ": " + std::to_string(u.features.size()) +
                      " features, expected " + std::to_string(m.feature_dim));
      }
      if (!all_finite(u.features)) out.push_back(where(d, t) + ": non-finite feature");
      if (classification) {
        if (!u.label) out.push_back(where(d, t) + ": missing label");
        if (u.label && *u.label >= m.class_names.size()) {
          out.push_back(where(d, t) + ": label " + std::to_string(*u.label) + " outside [0," +
                        std::to_string(m.class_names.size()) + ")");
        }
        if (u.targets) out.push_back(where(d, t) + ": targets present in a classification corpus");
      } else {
        if (!u.targets) out.push_back(where(d, t) + ": missing targets");
        if (u.targets && u.targets->size() != m.attribute_names.size()) {
          out.push_back(where(d, t) + ": " + std::to_string(u.targets->size()) +
                        " targets, expected " + std::to_string(m.attribute_names.size()));
        }
        if (u.targets && !all_finite(*u.targets)) out.push_back(where(d, t) + ": non-finite target");
        if (u.label) out.push_back(where(d, t) + ": label present in a regression corpus");
      }
      if (!u.listener_cues.empty()) {
        if (m.listener_cue_dim == 0) {
          out.push_back(where(d, t) + ": listener cues present but manifest listener_cue_dim is 0");
        } else if (u.listener_cues.size() != m.parties) {
          out.push_back(where(d, t) + ": " + std::to_string(u.listener_cues.size()) +
                        " cue vectors for " + std::to_string(m.parties) + " parties");
        } else {
          for (const auto& cue : u.listener_cues) {
            if (!cue.empty() && cue.size() != m.listener_cue_dim) {
              out.push_back(where(d, t) + ": cue of length " + std::to_string(cue.size()) +
                            ", expected " + std::to_string(m.listener_cue_dim));
              break;
            }
            if (!all_finite(cue)) {
              out.push_back(where(d, t) + ": non-finite listener cue");
              break;
            }
          }
        }
      }
    }
  }
  return out;
}

// ------------------------------------------------------------------ JSON I/O

namespace {

json manifest_to_json(const CorpusManifest& m) {
  json j;
  j["format"] = "dialoguernn-corpus";
  j["version"] = 1;
  j["mode"] = to_string(m.mode);
  j["feature_dim"] = m.feature_dim;
  j["class_names"] = m.class_names;
  j["attribute_names"] = m.attribute_names;
  j["parties"] = m.parties;
  j["listener_cue_dim"] = m.listener_cue_dim;
  j["dialogue_count"] = m.dialogue_count;
  j["utterance_count"] = m.utterance_count;
  return j;
}

CorpusManifest manifest_from_json(const json& j) {
  CorpusManifest m;
  if (j.value("format", std::string()) != "dialoguernn-corpus") {
    throw ValidationError("manifest: format must be \"dialoguernn-corpus\"");
  }
  m.mode = task_mode_from_string(j.at("mode").get<std::string>());
  m.feature_dim = j.at("feature_dim").get<std::size_t>();
  m.class_names = j.value("class_names", std::vector<std::string>{});
  m.attribute_names = j.value("attribute_names", std::vector<std::string>{});
  m.parties = j.value("parties", std::size_t{2});
  m.listener_cue_dim = j.value("listener_cue_dim", std::size_t{0});
  m.dialogue_count = j.at("dialogue_count").get<std::size_t>();
  m.utterance_count = j.at("utterance_count").get<std::size_t>();
  return m;
}

json dialogue_to_json(const Dialogue& d) {
  json utts = json::array();
  for (const Utterance& u : d.utterances) {
    json ju;
    ju["speaker"] = u.speaker;
    ju["features"] = u.features;
    if (u.label) ju["label"] = *u.label;
    if (u.targets) ju["targets"] = *u.targets;
    if (!u.listener_cues.empty()) ju["listener_cues"] = u.listener_cues;
    utts.push_back(std::move(ju));
  }
  return {{"id", d.id}, {"speakers", d.speakers}, {"utterances", std::move(utts)}};
}

Dialogue dialogue_from_json(const json& j) {
  Dialogue d;
  d.id = j.at("id").get<std::string>();
  d.speakers = j.at("speakers").get<std::vector<std::string>>();
  for (const json& ju : j.at("utterances")) {
    Utterance u;
    u.speaker = ju.at("speaker").get<std::size_t>();
    u.features = ju.at("features").get<std::vector<double>>();
    if (ju.contains("label")) u.label = ju.at("label").get<std::size_t>();
    if (ju.contains("targets")) u.targets = ju.at("targets").get<std::vector<double>>();
    if (ju.contains("listener_cues")) {
      u.listener_cues = ju.at("listener_cues").get<std::vector<std::vector<double>>>();
    }
    d.utterances.push_back(std::move(u));
  }
  return d;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

Corpus load_and_validate(const std::string& data_path, const std::string& manifest_path) {
  Corpus corpus;
  {
    std::ifstream in = open_in(manifest_path);
    try {
      corpus.manifest = manifest_from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw ValidationError(manifest_path + ": " + e.what());
    }
  }
  std::vector<std::string> violations;
  std::ifstream in = open_in(data_path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      corpus.dialogues.push_back(dialogue_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      violations.push_back(data_path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  for (std::string& v : validate_corpus(corpus)) violations.push_back(std::move(v));
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return corpus;
}

Corpus load_corpus_dir(const std::string& dir) {
  const std::filesystem::path p(dir);
  return load_and_validate((p / kDialoguesFile).string(), (p / kManifestFile).string());
}

void save_corpus(const Corpus& corpus, const std::string& data_path,
                 const std::string& manifest_path) {
  {
    std::ofstream out = open_out(manifest_path);
    out << manifest_to_json(corpus.manifest).dump(2) << '\n';
    if (!out) throw std::runtime_error("write to '" + manifest_path + "' failed");
  }
  std::ofstream out = open_out(data_path);
  for (const Dialogue& d : corpus.dialogues) out << dialogue_to_json(d).dump() << '\n';
  if (!out) throw std::runtime_error("write to '" + data_path + "' failed");
}

void save_corpus_dir(const Corpus& corpus, const std::string& dir) {
  const std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  save_corpus(corpus, (p / kDialoguesFile).string(), (p / kManifestFile).string());
}

// ------------------------------------------------------------------ splits

namespace {

Corpus subset(const Corpus& corpus, const std::vector<std::size_t>& indices) {
  Corpus out;
  out.manifest = corpus.manifest;
  for (std::size_t i : indices) out.dialogues.push_back(corpus.dialogues[i]);
  out.refresh_counts();
  return out;
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

SplitResult speaker_disjoint_split(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test fraction must lie in (0, 1)");
  }
  std::map<std::string, std::size_t> speaker_index;
  for (const Dialogue& d : corpus.dialogues) {
    for (const std::string& s : d.speakers) speaker_index.emplace(s, speaker_index.size());
  }
  if (speaker_index.size() < 2) {
    throw ValidationError("speaker-disjoint split needs at least 2 distinct speakers");
  }
  DisjointSet groups(speaker_index.size());
  for (const Dialogue& d : corpus.dialogues) {
    for (std::size_t i = 1; i < d.speakers.size(); ++i) {
      groups.unite(speaker_index[d.speakers[0]], speaker_index[d.speakers[i]]);
    }
  }
  // Group id per dialogue, utterances per group, groups in first-seen order.
  std::vector<std::size_t> dialogue_group(corpus.dialogues.size(), 0);
  std::map<std::size_t, std::size_t> group_utterances;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < corpus.dialogues.size(); ++i) {
    const Dialogue& d = corpus.dialogues[i];
    if (d.speakers.empty()) throw ValidationError("dialogue '" + d.id + "' has no speaker ids");
    const std::size_t g = groups.find(speaker_index[d.speakers[0]]);
    dialogue_group[i] = g;
    if (!group_utterances.count(g)) order.push_back(g);
    group_utterances[g] += d.size();
  }
  if (order.size() < 2) {
    throw ValidationError(
        "no speaker-disjoint split exists: every dialogue is connected through shared speakers");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const double total = static_cast<double>(corpus.utterance_count());
  std::set<std::size_t> test_groups;
  std::size_t taken = 0;
  for (std::size_t g : order) {
    if (static_cast<double>(taken) / total >= test_fraction - 1e-9) break;
    if (test_groups.size() + 1 == order.size()) break;  // keep train nonempty
    test_groups.insert(g);
    taken += group_utterances[g];
  }

  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < corpus.dialogues.size(); ++i) {
    (test_groups.count(dialogue_group[i]) ? test_idx : train_idx).push_back(i);
  }
  SplitResult r;
  r.train = subset(corpus, train_idx);
  r.test = subset(corpus, test_idx);
  r.achieved_fraction = static_cast<double>(taken) / total;
  std::set<std::string> names;
  for (const Dialogue& d : r.test.dialogues) names.insert(d.speakers.begin(), d.speakers.end());
  r.test_speakers.assign(names.begin(), names.end());
  return r;
}

std::pair<Corpus, Corpus> holdout_split(const Corpus& corpus, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ValidationError("holdout fraction must lie in [0, 1)");
  const std::size_t n = corpus.dialogues.size();
  std::size_t k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (fraction > 0.0 && k == 0) k = 1;
  if (k >= n && n > 0) {
    throw ValidationError("holdout of " + std::to_string(k) + " dialogues leaves none to train on");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::size_t> held(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> kept(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
  std::sort(held.begin(), held.end());
  std::sort(kept.begin(), kept.end());
  return {subset(corpus, kept), subset(corpus, held)};
}

// ------------------------------------------------------------------ fusion

Corpus fuse_modalities(std::span<const Corpus> modalities) {
  if (modalities.empty()) throw ValidationError("fuse_modalities: no modalities given");
  Corpus fused = modalities.front();
  for (std::size_t m = 1; m < modalities.size(); ++m) {
    const Corpus& other = modalities[m];
    const std::string tag = "modality " + std::to_string(m) + ": ";
    if (other.manifest.mode != fused.manifest.mode) throw ValidationError(tag + "task mode differs");
    if (other.dialogues.size() != fused.dialogues.size()) {
      throw ValidationError(tag + std::to_string(other.dialogues.size()) + " dialogues, expected " +
                            std::to_string(fused.dialogues.size()));
    }
    for (std::size_t i = 0; i < fused.dialogues.size(); ++i) {
      Dialogue& d = fused.dialogues[i];
      const Dialogue& o = other.dialogues[i];
      if (o.id != d.id) {
        throw ValidationError(tag + "dialogue " + std::to_string(i) + " is '" + o.id +
                              "', expected '" + d.id + "'");
      }
      if (o.size() != d.size()) {
        throw ValidationError(tag + "dialogue '" + d.id + "' has " + std::to_string(o.size()) +
                              " utterances, expected " + std::to_string(d.size()));
      }
      for (std::size_t t = 0; t < d.size(); ++t) {
        Utterance& u = d.utterances[t];
        const Utterance& v = o.utterances[t];
        if (v.speaker != u.speaker || v.label != u.label || v.targets != u.targets) {
          throw ValidationError(tag + where(d, t) + ": speaker or annotation differs");
        }
        u.features.insert(u.features.end(), v.features.begin(), v.features.end());
      }
    }
    fused.manifest.feature_dim += other.manifest.feature_dim;
  }
  return fused;
}

// ------------------------------------------------------------------ synthetic

void SyntheticSpec::validate() const {
  std::vector<std::string> errors;
  if (parties < 2) errors.push_back("parties must be >= 2");
  if (dialogues < 1) errors.push_back("dialogues must be >= 1");
  if (min_length < 1 || min_length > max_length) {
    errors.push_back("length range must satisfy 1 <= min_length <= max_length");
  }
  if (classes < 2) errors.push_back("classes must be >= 2");
  if (feature_dim < 1) errors.push_back("feature_dim must be >= 1");
  if (!(p_self >= 0.0 && p_other >= 0.0 && p_self + p_other <= 1.0)) {
    errors.push_back("need p_self >= 0, p_other >= 0 and p_self + p_other <= 1");
  }
  if (!(noise >= 0.0)) errors.push_back("noise must be >= 0");
  if (!(mean_scale >= 0.0 && offset_scale >= 0.0)) errors.push_back("scales must be >= 0");
  if (speaker_groups < 1) errors.push_back("speaker_groups must be >= 1");
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

SyntheticSpec synthetic_spec_from_json(const std::string& text) {
  SyntheticSpec s;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("synthetic spec: ") + e.what());
  }
  static const std::set<std::string> known = {
      "parties",    "dialogues", "min_length", "max_length", "classes",      "feature_dim", "p_self",
      "p_other",    "noise",     "mean_scale", "offset_scale", "speaker_groups", "seed"};
  std::vector<std::string> errors;
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) errors.push_back("synthetic spec: unknown key '" + key + "'");
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  try {
    s.parties = j.value("parties", s.parties);
    s.dialogues = j.value("dialogues", s.dialogues);
    s.min_length = j.value("min_length", s.min_length);
    s.max_length = j.value("max_length", s.max_length);
    s.classes = j.value("classes", s.classes);
    s.feature_dim = j.value("feature_dim", s.feature_dim);
    s.p_self = j.value("p_self", s.p_self);
    s.p_other = j.value("p_other", s.p_other);
    s.noise = j.value("noise", s.noise);
    s.mean_scale = j.value("mean_scale", s.mean_scale);
    s.offset_scale = j.value("offset_scale", s.offset_scale);
    s.speaker_groups = j.value("speaker_groups", s.speaker_groups);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("synthetic spec: ") + e.what());
  }
  return s;
}

std::string synthetic_spec_to_json(const SyntheticSpec& s) {
  json j = {{"parties", s.parties},       {"dialogues", s.dialogues},
            {"min_length", s.min_length}, {"max_length", s.max_length},
            {"classes", s.classes},       {"feature_dim", s.feature_dim},
            {"p_self", s.p_self},         {"p_other", s.p_other},
            {"noise", s.noise},           {"mean_scale", s.mean_scale},
            {"offset_scale", s.offset_scale}, {"speaker_groups", s.speaker_groups},
            {"seed", s.seed}};
  return j.dump(2) + "\n";
}

Corpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_class(0, spec.classes - 1);
  std::uniform_int_distribution<std::size_t> length(spec.min_length, spec.max_length);

  auto draw = [&](double scale) {
    std::vector<double> v(spec.feature_dim);
    for (double& x : v) x = scale * normal(rng);
    return v;
  };
  std::vector<std::vector<double>> class_means;
  for (std::size_t c = 0; c < spec.classes; ++c) class_means.push_back(draw(spec.mean_scale));
  const std::size_t speaker_total = spec.speaker_groups * spec.parties;
  std::vector<std::vector<double>> offsets;
  for (std::size_t s = 0; s < speaker_total; ++s) offsets.push_back(draw(spec.offset_scale));

  Corpus corpus;
  corpus.manifest.mode = TaskMode::kClassification;
  corpus.manifest.feature_dim = spec.feature_dim;
  corpus.manifest.parties = spec.parties;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    corpus.manifest.class_names.push_back("class" + std::to_string(c));
  }

  for (std::size_t d = 0; d < spec.dialogues; ++d) {
    Dialogue dlg;
    dlg.id = "syn" + std::to_string(d);
    const std::size_t group = d % spec.speaker_groups;
    std::vector<std::size_t> global_speaker(spec.parties);
    for (std::size_t p = 0; p < spec.parties; ++p) {
      global_speaker[p] = group * spec.parties + p;
      dlg.speakers.push_back("spk" + std::to_string(global_speaker[p]));
    }
    std::vector<std::optional<std::size_t>> own(spec.parties);
    std::optional<std::size_t> last_label;
    std::optional<std::size_t> last_speaker;
    const std::size_t n = length(rng);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t s = t % spec.parties;
      std::size_t label;
      if (!own[s]) {
        label = any_class(rng);
      } else {
        const double r = unit(rng);
        const bool other_available = last_speaker && *last_speaker != s;
        if (r < spec.p_self) {
          label = *own[s];
        } else if (r < spec.p_self + spec.p_other && other_available) {
          label = *last_label;
        } else {
          label = any_class(rng);
        }
      }
      own[s] = label;
      last_label = label;
      last_speaker = s;

      Utterance u;
      u.speaker = s;
      u.label = label;
      u.features.resize(spec.feature_dim);
      for (std::size_t k = 0; k < spec.feature_dim; ++k) {
        u.features[k] = class_means[label][k] + offsets[global_speaker[s]][k];
        if (spec.noise > 0.0) u.features[k] += spec.noise * normal(rng);
      }
      dlg.utterances.push_back(std::move(u));
    }
    corpus.dialogues.push_back(std::move(dlg));
  }
  corpus.refresh_counts();
  return corpus;
}

std::vector<std::optional<std::vector<double>>> average_over_spans(
    std::span<const double> timestamps, const std::vector<std::vector<double>>& samples,
    std::span<const std::pair<double, double>> spans) {
  if (timestamps.size() != samples.size()) {
    throw std::invalid_argument("average_over_spans: timestamp/sample count mismatch");
  }
  std::vector<std::optional<std::vector<double>>> out;
  for (const auto& [start, end] : spans) {
    std::optional<std::vector<double>> mean;
    std::size_t count = 0;
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
      if (timestamps[i] < start || timestamps[i] >= end) continue;
      if (!mean) mean.emplace(samples[i].size(), 0.0);
      if (samples[i].size() != mean->size()) {
        throw std::invalid_argument("average_over_spans: ragged samples");
      }
      for (std::size_t k = 0; k < mean->size(); ++k) (*mean)[k] += samples[i][k];
      ++count;
    }
    if (mean) {
      for (double& v : *mean) v /= static_cast<double>(count);
    }
    out.push_back(std::move(mean));
  }
  return out;
}

}  // namespace drnn
