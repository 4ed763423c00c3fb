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

// JSON forms of the configs and of a trained model. Doubles are written in
// shortest round-trip form, so save → load is bit-exact.

#include <string>

#include "dialoguernn/model.hpp"
#include "dialoguernn/training.hpp"
#include "json.hpp"

namespace drnn {

// Readers start from the defaults, override the keys present and throw
// ValidationError on unknown keys or wrong types.
void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct Checkpoint {
  ModelConfig config;
  Parameters parameters;
};

std::string checkpoint_json(const ModelConfig& config, const Parameters& params);
/// Throws ValidationError on a missing, extra or misshapen table.
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::string& path, const ModelConfig& config, const Parameters& params);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace drnn
