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

#include "dialoguernn/checkpoint.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "dialoguernn/errors.hpp"

namespace drnn {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) throw ValidationError(std::string(what) + " must be a JSON object");
  std::vector<std::string> errors;
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) errors.push_back(std::string(what) + ": unknown key '" + key + "'");
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

template <class T>
void read(const json& j, const char* key, T& out, const char* what) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string(what) + ": '" + key + "' has the wrong type");
  }
}

}  // namespace

void to_json(json& j, const ModelConfig& c) {
  j = json{{"feature_dim", c.feature_dim},
           {"global_dim", c.global_dim},
           {"party_dim", c.party_dim},
           {"emotion_dim", c.emotion_dim},
           {"hidden_dim", c.hidden_dim},
           {"cue_dim", c.cue_dim},
           {"output_dim", c.output_dim},
           {"parties", c.parties},
           {"mode", to_string(c.mode)},
           {"listener", to_string(c.listener)},
           {"bidirectional", c.bidirectional},
           {"emotion_attention", c.emotion_attention},
           {"party_state", c.party_state},
           {"emotion_gru", c.emotion_gru}};
}

void from_json(const json& j, ModelConfig& c) {
  const char* what = "model config";
  reject_unknown(j,
                 {"feature_dim", "global_dim", "party_dim", "emotion_dim", "hidden_dim", "cue_dim",
                  "output_dim", "parties", "mode", "listener", "bidirectional",
                  "emotion_attention", "party_state", "emotion_gru"},
                 what);
  read(j, "feature_dim", c.feature_dim, what);
  read(j, "global_dim", c.global_dim, what);
  read(j, "party_dim", c.party_dim, what);
  read(j, "emotion_dim", c.emotion_dim, what);
  read(j, "hidden_dim", c.hidden_dim, what);
  read(j, "cue_dim", c.cue_dim, what);
  read(j, "output_dim", c.output_dim, what);
  read(j, "parties", c.parties, what);
  std::string s;
  if (j.contains("mode")) {
    read(j, "mode", s, what);
    c.mode = task_mode_from_string(s);
  }
  if (j.contains("listener")) {
    read(j, "listener", s, what);
    c.listener = listener_update_from_string(s);
  }
  read(j, "bidirectional", c.bidirectional, what);
  read(j, "emotion_attention", c.emotion_attention, what);
  read(j, "party_state", c.party_state, what);
  read(j, "emotion_gru", c.emotion_gru, what);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"learning_rate", c.learning_rate},
           {"beta1", c.beta1},
           {"beta2", c.beta2},
           {"epsilon", c.epsilon},
           {"l2", c.l2},
           {"epochs", c.epochs},
           {"seed", c.seed},
           {"patience", c.patience ? json(*c.patience) : json(nullptr)},
           {"record_wall_time", c.record_wall_time}};
}

void from_json(const json& j, TrainConfig& c) {
  const char* what = "train config";
  reject_unknown(j,
                 {"learning_rate", "beta1", "beta2", "epsilon", "l2", "epochs", "seed", "patience",
                  "record_wall_time"},
                 what);
  read(j, "learning_rate", c.learning_rate, what);
  read(j, "beta1", c.beta1, what);
  read(j, "beta2", c.beta2, what);
  read(j, "epsilon", c.epsilon, what);
  read(j, "l2", c.l2, what);
  read(j, "epochs", c.epochs, what);
  read(j, "seed", c.seed, what);
  if (j.contains("patience")) {
    if (j.at("patience").is_null()) {
      c.patience.reset();
    } else {
      std::size_t p = 0;
      read(j, "patience", p, what);
      c.patience = p;
    }
  }
  read(j, "record_wall_time", c.record_wall_time, what);
}

std::string checkpoint_json(const ModelConfig& config, const Parameters& params) {
  json tables = json::object();
  Parameters::visit(
      [&](const std::string& name, Tensor& t) {
        tables[name] = {{"shape", t.shape()}, {"values", t.data()}};
      },
      const_cast<Parameters&>(params));
  json j = {{"format", "dialoguernn-checkpoint"},
            {"version", 1},
            {"config", config},
            {"parameters", std::move(tables)}};
  return j.dump() + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("checkpoint: ") + e.what());
  }
  if (!j.is_object() || j.value("format", std::string()) != "dialoguernn-checkpoint") {
    throw ValidationError("checkpoint: format must be \"dialoguernn-checkpoint\"");
  }
  if (!j.contains("config") || !j.contains("parameters")) {
    throw ValidationError("checkpoint: needs both 'config' and 'parameters'");
  }
  Checkpoint cp;
  from_json(j.at("config"), cp.config);
  cp.config.validate();
  cp.parameters = make_zero_parameters(cp.config);
  const json& tables = j.at("parameters");
  std::vector<std::string> errors;
  std::set<std::string> expected;
  Parameters::visit(
      [&](const std::string& name, Tensor& t) {
        expected.insert(name);
        if (!tables.contains(name)) {
          errors.push_back("checkpoint: missing table " + name);
          return;
        }
        try {
          const Shape shape = tables.at(name).at("shape").get<Shape>();
          if (shape != t.shape()) {
            errors.push_back("checkpoint: " + name + " has shape " + shape_string(shape) +
                             ", config implies " + shape_string(t.shape()));
            return;
          }
          t = Tensor(shape, tables.at(name).at("values").get<std::vector<double>>());
        } catch (const json::exception& e) {
          errors.push_back("checkpoint: table " + name + ": " + e.what());
        } catch (const ShapeError& e) {
          errors.push_back("checkpoint: table " + name + ": " + e.what());
        }
      },
      cp.parameters);
  for (const auto& [name, _] : tables.items()) {
    if (!expected.count(name)) errors.push_back("checkpoint: unexpected table " + name);
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return cp;
}

void save_checkpoint(const std::string& path, const ModelConfig& config, const Parameters& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << checkpoint_json(config, params);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace drnn
