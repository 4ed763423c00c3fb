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

// Party-state recurrent emotion model.
//
// Per utterance u_t spoken by party s, in this order:
//   c_t, α_t = attention of u_t over the global history g_1..g_{t-1}
//   g_t      = GRU_G(g_{t-1}, u_t ⊕ q_s)          (q_s read before its update)
//   q_s      = GRU_P(q_s, u_t ⊕ c_t)
//   q_i      = q_i  or  GRU_L(q_i, v_i ⊕ c_t)     for listeners i ≠ s
//   e_t      = GRU_E(e_{t-1}, q_s)
//   head(e_t)
// g_0, e_0 and every q start at zero; c_1 is zero and α_1 empty.
//
// Bidirectional models run a second, independently parameterized pass over
// the reversed dialogue and concatenate per-utterance representations.
// Emotion attention (β) re-weights the representations over the whole
// dialogue, position t included, before the head.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dialoguernn/dialogue.hpp"
#include "dialoguernn/gru.hpp"
#include "dialoguernn/tensor.hpp"

namespace drnn {

enum class ListenerUpdate { kIdentity, kGru };

std::string to_string(ListenerUpdate l);
ListenerUpdate listener_update_from_string(const std::string& s);

struct ModelConfig {
  std::size_t feature_dim = 100;  // D_m
  std::size_t global_dim = 100;   // D_G
  std::size_t party_dim = 100;    // D_P
  std::size_t emotion_dim = 100;  // D_E
  std::size_t hidden_dim = 100;   // D_l
  std::size_t cue_dim = 7;        // D_V
  std::size_t output_dim = 6;     // class count or attribute count
  std::size_t parties = 2;        // M
  TaskMode mode = TaskMode::kClassification;
  ListenerUpdate listener = ListenerUpdate::kIdentity;
  bool bidirectional = false;
  bool emotion_attention = false;
  // Ablation switches. With party_state off every q stays zero, the speaker
  // and listener updates are skipped and the emotion GRU consumes c_t. With
  // emotion_gru off the head reads the updated speaker state directly.
  bool party_state = true;
  bool emotion_gru = true;

  /// Throws ValidationError listing every violated constraint.
  void validate() const;

  /// Extent of one direction's per-utterance representation.
  std::size_t direction_dim() const { return emotion_gru ? emotion_dim : party_dim; }
  /// Extent of the head's input: k·direction_dim with k = 2 when bidirectional.
  std::size_t representation_dim() const { return (bidirectional ? 2 : 1) * direction_dim(); }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Throws ValidationError naming each dimension (feature_dim, output_dim,
/// parties, cue_dim, mode) on which corpus and model disagree.
void check_compatible(const CorpusManifest& manifest, const ModelConfig& config);

/// The named variants: "base", "l" (listener GRU), "bi", "att", "bi+att".
void apply_variant(ModelConfig& config, const std::string& variant);

template <class T>
struct DirectionWeights {
  GruWeights<T> global;
  std::optional<GruWeights<T>> party;
  std::optional<GruWeights<T>> listener;
  std::optional<GruWeights<T>> emotion;
  T w_alpha;  // D_m × D_G

  template <class Fn, class... Others>
  static void visit(const std::string& prefix, Fn&& fn, DirectionWeights& self, Others&... others);
};

template <class T>
struct ModelWeights {
  DirectionWeights<T> forward;
  std::optional<DirectionWeights<T>> backward;
  std::optional<T> w_beta;
  T w_hidden, b_hidden;
  std::optional<T> w_softmax, b_softmax;
  std::optional<T> w_regression, b_regression;

  /// Calls fn(name, table, other_tables...) over every present table, in a
  /// fixed order. All arguments must have the same set of tables present.
  template <class Fn, class... Others>
  static void visit(Fn&& fn, ModelWeights& self, Others&... others);
};

using Parameters = ModelWeights<Tensor>;
using BoundParameters = ModelWeights<Var>;
using BoundDirection = DirectionWeights<Var>;

/// Random initialization from the seed: GRU tables uniform in ±1/√hidden,
/// other matrices uniform in ±1/√fan_in, all biases zero.
Parameters make_parameters(const ModelConfig& config, std::uint64_t seed);
Parameters make_zero_parameters(const ModelConfig& config);

/// Throws ShapeError naming the first table whose presence or shape does not
/// follow from the config.
void audit_parameters(const Parameters& params, const ModelConfig& config);

std::vector<std::string> parameter_names(const Parameters& params);
std::size_t parameter_count(const Parameters& params);
/// Σθ² over every table.
double squared_norm(const Parameters& params);

BoundParameters bind(Tape& tape, const Parameters& params);
/// Gradients accumulated by the last backward(), shaped like the parameters.
Parameters gradients(const BoundParameters& bound);

// ------------------------------------------------------------ per-step pieces

struct DialogueState {
  std::vector<Var> global_history;  // g_1..g_t
  std::vector<Var> party;           // q_1..q_M
  Var emotion;                      // e_{t-1}
};

DialogueState initial_state(Tape& tape, const ModelConfig& config);

struct AttentionResult {
  Var context;  // c_t, D_G
  Var weights;  // α_t, length t−1 (empty for an empty history)
};

/// α = softmax(u_tᵀ·W_α·[g_1..g_{t−1}]), c_t = Σ α_i g_i. An empty history
/// yields a zero context and an empty α.
AttentionResult attend_context(Var utterance, std::span<const Var> history, Var w_alpha);

/// Appends g_t = GRU_G(g_{t−1}, u_t ⊕ q_speaker) and returns it.
Var global_update(DialogueState& state, Var utterance, std::size_t speaker,
                  const BoundGru& global);

void speaker_update(DialogueState& state, Var utterance, Var context, std::size_t speaker,
                    const BoundGru& party);

/// Identity leaves listener states untouched. The GRU rule updates each
/// listener i from its cue vector cues[i] ⊕ c_t; a missing cue is zero.
void listener_update(DialogueState& state, ListenerUpdate variant, std::span<const Var> cues,
                     Var context, std::size_t speaker, const BoundGru* listener);

Var emotion_update(Var previous, Var speaker_state, const BoundGru& emotion);

struct ClassifierOutput {
  Var probabilities;
  std::size_t predicted = 0;
};

ClassifierOutput classify(Var representation, const BoundParameters& params,
                          const ModelConfig& config);
Var predict_regression(Var representation, const BoundParameters& params,
                       const ModelConfig& config);

struct EmotionAttentionResult {
  std::vector<Var> attended;  // ẽ_t
  std::vector<Var> weights;   // β_t rows, each of length N
};

EmotionAttentionResult emotion_attention(std::span<const Var> representations, Var w_beta);

// ------------------------------------------------------------ whole dialogue

struct UtteranceTrace {
  std::vector<double> alpha;           // forward direction, length t−1
  std::vector<double> alpha_backward;  // backward direction, empty if unidirectional
  std::vector<double> representation;  // e_t (concatenated when bidirectional)
  std::vector<double> attended;        // ẽ_t, empty without emotion attention
  std::vector<double> output;          // probabilities or regression values
  std::optional<std::size_t> predicted;

  friend bool operator==(const UtteranceTrace&, const UtteranceTrace&) = default;
};

struct ForwardTrace {
  std::string dialogue_id;
  std::vector<UtteranceTrace> steps;
  std::vector<std::vector<double>> beta;  // N×N, empty without emotion attention

  friend bool operator==(const ForwardTrace&, const ForwardTrace&) = default;
};

/// Everything a training step needs from one forward pass.
struct DialogueGraph {
  std::vector<Var> outputs;  // probabilities or regression values, per utterance
  ForwardTrace trace;
};

/// Records the full forward pass for a dialogue on the tape. Throws
/// ShapeError naming the utterance index on feature or speaker mismatch.
DialogueGraph build_forward(Tape& tape, const BoundParameters& params, const ModelConfig& config,
                            const Dialogue& dialogue);

/// Forward pass for any configured variant.
ForwardTrace forward_dialogue(const Dialogue& dialogue, const Parameters& params,
                              const ModelConfig& config);

/// Same as forward_dialogue; rejects configs without the backward direction.
ForwardTrace forward_bidirectional(const Dialogue& dialogue, const Parameters& params,
                                   const ModelConfig& config);

// ------------------------------------------------------------ template bodies

namespace detail {

template <class Fn, class T, class... Others>
void visit_gru(const std::string& prefix, Fn& fn, GruWeights<T>& self, Others&... others) {
  GruWeights<T>::visit([&](const char* suffix, auto&... tables) { fn(prefix + suffix, tables...); },
                       self, others...);
}

template <class U, class T>
U& same_optional(std::optional<U>& other, const std::optional<T>& self, const std::string& name) {
  if (!other) throw std::logic_error("parameter set lacks " + name);
  (void)self;
  return *other;
}

}  // namespace detail

template <class T>
template <class Fn, class... Others>
void DirectionWeights<T>::visit(const std::string& prefix, Fn&& fn, DirectionWeights& self,
                                Others&... others) {
  detail::visit_gru(prefix + "global.", fn, self.global, others.global...);
  if (self.party) {
    detail::visit_gru(prefix + "party.", fn, *self.party,
                      detail::same_optional(others.party, self.party, prefix + "party")...);
  }
  if (self.listener) {
    detail::visit_gru(prefix + "listener.", fn, *self.listener,
                      detail::same_optional(others.listener, self.listener, prefix + "listener")...);
  }
  if (self.emotion) {
    detail::visit_gru(prefix + "emotion.", fn, *self.emotion,
                      detail::same_optional(others.emotion, self.emotion, prefix + "emotion")...);
  }
  fn(prefix + "W_alpha", self.w_alpha, others.w_alpha...);
}

template <class T>
template <class Fn, class... Others>
void ModelWeights<T>::visit(Fn&& fn, ModelWeights& self, Others&... others) {
  DirectionWeights<T>::visit("fwd.", fn, self.forward, others.forward...);
  if (self.backward) {
    DirectionWeights<T>::visit("bwd.", fn, *self.backward,
                               detail::same_optional(others.backward, self.backward, "bwd")...);
  }
  auto optional_table = [&](const char* name, auto get) {
    if (get(self)) fn(name, *get(self), detail::same_optional(get(others), get(self), name)...);
  };
  optional_table("W_beta", [](auto& w) -> auto& { return w.w_beta; });
  fn("W_l", self.w_hidden, others.w_hidden...);
  fn("b_l", self.b_hidden, others.b_hidden...);
  optional_table("W_smax", [](auto& w) -> auto& { return w.w_softmax; });
  optional_table("b_smax", [](auto& w) -> auto& { return w.b_softmax; });
  optional_table("W_reg", [](auto& w) -> auto& { return w.w_regression; });
  optional_table("b_reg", [](auto& w) -> auto& { return w.b_regression; });
}

}  // namespace drnn
