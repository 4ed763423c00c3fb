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

#include "dialoguernn/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dialoguernn/errors.hpp"

namespace drnn {

std::string to_string(TaskMode mode) {
  return mode == TaskMode::kClassification ? "classification" : "regression";
}

TaskMode task_mode_from_string(const std::string& s) {
  if (s == "classification") return TaskMode::kClassification;
  if (s == "regression") return TaskMode::kRegression;
  throw ValidationError("unknown mode '" + s + "' (expected classification or regression)");
}

std::string to_string(ListenerUpdate l) { return l == ListenerUpdate::kIdentity ? "identity" : "gru"; }

ListenerUpdate listener_update_from_string(const std::string& s) {
  if (s == "identity") return ListenerUpdate::kIdentity;
  if (s == "gru") return ListenerUpdate::kGru;
  throw ValidationError("unknown listener update '" + s + "' (expected identity or gru)");
}

void ModelConfig::validate() const {
  std::vector<std::string> errors;
  auto positive = [&](std::size_t v, const char* name) {
    if (v < 1) errors.push_back(std::string(name) + " must be >= 1");
  };
  positive(feature_dim, "feature_dim");
  positive(global_dim, "global_dim");
  positive(party_dim, "party_dim");
  positive(emotion_dim, "emotion_dim");
  positive(hidden_dim, "hidden_dim");
  positive(cue_dim, "cue_dim");
  positive(output_dim, "output_dim");
  if (parties < 2) errors.push_back("parties must be >= 2");
  if (mode == TaskMode::kClassification && output_dim < 2) {
    errors.push_back("classification needs output_dim (class count) >= 2");
  }
  if (!party_state && !emotion_gru) {
    errors.push_back("party_state and emotion_gru cannot both be ablated");
  }
  if (!party_state && listener == ListenerUpdate::kGru) {
    errors.push_back("listener gru update requires party_state");
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

void check_compatible(const CorpusManifest& manifest, const ModelConfig& config) {
  std::vector<std::string> errors;
  auto same = [&](const char* name, std::size_t corpus, std::size_t model) {
    if (corpus != model) {
      errors.push_back(std::string(name) + ": corpus has " + std::to_string(corpus) +
                       ", model expects " + std::to_string(model));
    }
  };
  if (manifest.mode != config.mode) {
    errors.push_back("mode: corpus is " + to_string(manifest.mode) + ", model is " +
                     to_string(config.mode));
  }
  same("feature_dim", manifest.feature_dim, config.feature_dim);
  same("output_dim", manifest.output_dim(), config.output_dim);
  same("parties", manifest.parties, config.parties);
  if (config.listener == ListenerUpdate::kGru && manifest.listener_cue_dim != 0) {
    same("cue_dim", manifest.listener_cue_dim, config.cue_dim);
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

void apply_variant(ModelConfig& config, const std::string& variant) {
  config.listener = ListenerUpdate::kIdentity;
  config.bidirectional = false;
  config.emotion_attention = false;
  if (variant == "base") return;
  if (variant == "l") {
    config.listener = ListenerUpdate::kGru;
  } else if (variant == "bi") {
    config.bidirectional = true;
  } else if (variant == "att") {
    config.emotion_attention = true;
  } else if (variant == "bi+att") {
    config.bidirectional = true;
    config.emotion_attention = true;
  } else {
    throw ValidationError("unknown variant '" + variant + "' (expected base, l, bi, att, bi+att)");
  }
}

// ------------------------------------------------------------ parameters

namespace {

struct Layout {
  std::size_t global_in, party_in, listener_in, emotion_in;
};

Layout layout_of(const ModelConfig& c) {
  return {c.feature_dim + c.party_dim, c.feature_dim + c.global_dim, c.cue_dim + c.global_dim,
          c.party_state ? c.party_dim : c.global_dim};
}

template <class MakeGru, class MakeMatrix>
Parameters build_parameters(const ModelConfig& config, MakeGru make_gru, MakeMatrix make_matrix) {
  config.validate();
  const Layout l = layout_of(config);
  auto direction = [&] {
    DirectionWeights<Tensor> d;
    d.global = make_gru(config.global_dim, l.global_in);
    if (config.party_state) {
      d.party = make_gru(config.party_dim, l.party_in);
      if (config.listener == ListenerUpdate::kGru) d.listener = make_gru(config.party_dim, l.listener_in);
    }
    if (config.emotion_gru) d.emotion = make_gru(config.emotion_dim, l.emotion_in);
    d.w_alpha = make_matrix(config.feature_dim, config.global_dim);
    return d;
  };
  Parameters p;
  p.forward = direction();
  if (config.bidirectional) p.backward = direction();
  const std::size_t rep = config.representation_dim();
  if (config.emotion_attention) p.w_beta = make_matrix(rep, rep);
  p.w_hidden = make_matrix(config.hidden_dim, rep);
  p.b_hidden = Tensor::zeros({config.hidden_dim});
  if (config.mode == TaskMode::kClassification) {
    p.w_softmax = make_matrix(config.output_dim, config.hidden_dim);
    p.b_softmax = Tensor::zeros({config.output_dim});
  } else {
    p.w_regression = make_matrix(config.output_dim, config.hidden_dim);
    p.b_regression = Tensor::zeros({config.output_dim});
  }
  return p;
}

template <class Fn>
void visit_const(const Parameters& p, Fn&& fn) {
  Parameters::visit([&](const std::string& name, Tensor& t) { fn(name, std::as_const(t)); },
                    const_cast<Parameters&>(p));
}

}  // namespace

Parameters make_parameters(const ModelConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return build_parameters(
      config, [&](std::size_t h, std::size_t in) { return make_gru_random(h, in, rng); },
      [&](std::size_t rows, std::size_t cols) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Tensor t = Tensor::zeros({rows, cols});
        for (double& v : t.values()) v = dist(rng);
        return t;
      });
}

Parameters make_zero_parameters(const ModelConfig& config) {
  return build_parameters(
      config, [](std::size_t h, std::size_t in) { return make_gru_zero(h, in); },
      [](std::size_t rows, std::size_t cols) { return Tensor::zeros({rows, cols}); });
}

void audit_parameters(const Parameters& params, const ModelConfig& config) {
  const Parameters expected = make_zero_parameters(config);
  std::vector<std::string> want, have;
  visit_const(expected, [&](const std::string& name, const Tensor&) { want.push_back(name); });
  visit_const(params, [&](const std::string& name, const Tensor&) { have.push_back(name); });
  for (const auto& n : want) {
    if (std::find(have.begin(), have.end(), n) == have.end()) {
      throw ShapeError("parameter table '" + n + "' is missing for this configuration");
    }
  }
  for (const auto& n : have) {
    if (std::find(want.begin(), want.end(), n) == want.end()) {
      throw ShapeError("parameter table '" + n + "' is not used by this configuration");
    }
  }
  Parameters::visit(
      [](const std::string& name, Tensor& exp, Tensor& got) {
        if (exp.shape() != got.shape()) {
          throw ShapeError("parameter table '" + name + "': expected " + shape_string(exp.shape()) +
                           ", got " + shape_string(got.shape()));
        }
      },
      const_cast<Parameters&>(expected), const_cast<Parameters&>(params));
}

std::vector<std::string> parameter_names(const Parameters& params) {
  std::vector<std::string> names;
  visit_const(params, [&](const std::string& name, const Tensor&) { names.push_back(name); });
  return names;
}

std::size_t parameter_count(const Parameters& params) {
  std::size_t n = 0;
  visit_const(params, [&](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

double squared_norm(const Parameters& params) {
  double acc = 0.0;
  visit_const(params, [&](const std::string&, const Tensor& t) {
    for (double v : t.values()) acc += v * v;
  });
  return acc;
}

BoundParameters bind(Tape& tape, const Parameters& params) {
  // Mirror the optional structure first so the lockstep visit lines up.
  BoundParameters b;
  auto mirror_dir = [](const DirectionWeights<Tensor>& d) {
    DirectionWeights<Var> out;
    if (d.party) out.party.emplace();
    if (d.listener) out.listener.emplace();
    if (d.emotion) out.emotion.emplace();
    return out;
  };
  b.forward = mirror_dir(params.forward);
  if (params.backward) b.backward = mirror_dir(*params.backward);
  if (params.w_beta) b.w_beta.emplace();
  if (params.w_softmax) b.w_softmax.emplace();
  if (params.b_softmax) b.b_softmax.emplace();
  if (params.w_regression) b.w_regression.emplace();
  if (params.b_regression) b.b_regression.emplace();
  BoundParameters::visit([&](const std::string&, Var& v, Tensor& t) { v = tape.leaf(t); }, b,
                         const_cast<Parameters&>(params));
  return b;
}

Parameters gradients(const BoundParameters& bound) {
  Parameters g;
  auto mirror_dir = [](const DirectionWeights<Var>& d) {
    DirectionWeights<Tensor> out;
    if (d.party) out.party.emplace();
    if (d.listener) out.listener.emplace();
    if (d.emotion) out.emotion.emplace();
    return out;
  };
  g.forward = mirror_dir(bound.forward);
  if (bound.backward) g.backward = mirror_dir(*bound.backward);
  if (bound.w_beta) g.w_beta.emplace();
  if (bound.w_softmax) g.w_softmax.emplace();
  if (bound.b_softmax) g.b_softmax.emplace();
  if (bound.w_regression) g.w_regression.emplace();
  if (bound.b_regression) g.b_regression.emplace();
  Parameters::visit(
      [](const std::string&, Tensor& t, Var& v) {
        const auto gr = v.grad();
        t = Tensor(v.shape(), std::vector<double>(gr.begin(), gr.end()));
      },
      g, const_cast<BoundParameters&>(bound));
  return g;
}

// ------------------------------------------------------------ per-step pieces

DialogueState initial_state(Tape& tape, const ModelConfig& config) {
  DialogueState s;
  s.party.reserve(config.parties);
  for (std::size_t i = 0; i < config.parties; ++i) s.party.push_back(tape.constant(Tensor::zeros({config.party_dim})));
  s.emotion = tape.constant(Tensor::zeros({config.direction_dim()}));
  return s;
}

AttentionResult attend_context(Var utterance, std::span<const Var> history, Var w_alpha) {
  const Shape ws = w_alpha.shape();
  if (ws.size() != 2 || utterance.shape() != Shape{ws[0]}) {
    throw ShapeError("attend_context: utterance " + shape_string(utterance.shape()) +
                     " does not match W_alpha " + shape_string(ws));
  }
  Tape& tape = utterance.tape();
  if (history.empty()) {
    return {tape.constant(Tensor::zeros({ws[1]})), tape.constant(Tensor::zeros({0}))};
  }
  // u_tᵀ·W_α is a row vector of extent D_G; score_i = (W_αᵀ u_t)·g_i.
  Var query = matvec_transposed(w_alpha, utterance);
  std::vector<Var> scores;
  scores.reserve(history.size());
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (history[i].shape() != Shape{ws[1]}) {
      throw ShapeError("attend_context: global state " + std::to_string(i) + " is " +
                       shape_string(history[i].shape()) + ", expected [" + std::to_string(ws[1]) +
                       "]");
    }
    scores.push_back(dot(query, history[i]));
  }
  Var alpha = softmax(stack(scores));
  return {weighted_sum(alpha, history), alpha};
}

namespace {

void check_speaker(const DialogueState& state, std::size_t speaker) {
  if (speaker >= state.party.size()) {
    throw ShapeError("speaker index " + std::to_string(speaker) + " outside " +
                     std::to_string(state.party.size()) + " parties");
  }
}

}  // namespace

Var global_update(DialogueState& state, Var utterance, std::size_t speaker,
                  const BoundGru& global) {
  check_speaker(state, speaker);
  Tape& tape = utterance.tape();
  Var previous = state.global_history.empty()
                     ? tape.constant(Tensor::zeros({global.b_r.size()}))
                     : state.global_history.back();
  Var g = gru_step(global, previous, concat(utterance, state.party[speaker]));
  state.global_history.push_back(g);
  return g;
}

void speaker_update(DialogueState& state, Var utterance, Var context, std::size_t speaker,
                    const BoundGru& party) {
  check_speaker(state, speaker);
  state.party[speaker] = gru_step(party, state.party[speaker], concat(utterance, context));
}

void listener_update(DialogueState& state, ListenerUpdate variant, std::span<const Var> cues,
                     Var context, std::size_t speaker, const BoundGru* listener) {
  check_speaker(state, speaker);
  if (variant == ListenerUpdate::kIdentity) return;
  if (listener == nullptr) {
    throw std::invalid_argument("listener_update: gru variant without listener parameters");
  }
  const std::size_t cue_dim = listener->wx_r.shape()[1] - context.size();
  Tape& tape = context.tape();
  for (std::size_t i = 0; i < state.party.size(); ++i) {
    if (i == speaker) continue;
    Var cue = (i < cues.size() && cues[i].valid()) ? cues[i]
                                                   : tape.constant(Tensor::zeros({cue_dim}));
    state.party[i] = gru_step(*listener, state.party[i], concat(cue, context));
  }
}

Var emotion_update(Var previous, Var speaker_state, const BoundGru& emotion) {
  return gru_step(emotion, previous, speaker_state);
}

namespace {

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

Var hidden_layer(Var representation, const BoundParameters& params, const ModelConfig& config) {
  if (representation.shape() != Shape{config.representation_dim()}) {
    throw ShapeError("head input " + shape_string(representation.shape()) + ", expected [" +
                     std::to_string(config.representation_dim()) + "]");
  }
  return relu(add(matvec(params.w_hidden, representation), params.b_hidden));
}

}  // namespace

ClassifierOutput classify(Var representation, const BoundParameters& params,
                          const ModelConfig& config) {
  if (config.mode != TaskMode::kClassification || !params.w_softmax) {
    throw std::invalid_argument("classify: model is not in classification mode");
  }
  Var hidden = hidden_layer(representation, params, config);
  Var probs = softmax(add(matvec(*params.w_softmax, hidden), *params.b_softmax));
  return {probs, argmax_lowest(probs.value().values())};
}

Var predict_regression(Var representation, const BoundParameters& params,
                       const ModelConfig& config) {
  if (config.mode != TaskMode::kRegression || !params.w_regression) {
    throw std::invalid_argument("predict_regression: model is not in regression mode");
  }
  Var hidden = hidden_layer(representation, params, config);
  return add(matvec(*params.w_regression, hidden), *params.b_regression);
}

EmotionAttentionResult emotion_attention(std::span<const Var> representations, Var w_beta) {
  if (representations.empty()) throw ShapeError("emotion_attention: empty dialogue");
  EmotionAttentionResult out;
  for (const Var& e : representations) {
    if (e.shape() != representations.front().shape()) {
      throw ShapeError("emotion_attention: representations " +
                       shape_string(representations.front().shape()) + " and " +
                       shape_string(e.shape()));
    }
    Var query = matvec_transposed(w_beta, e);
    std::vector<Var> scores;
    scores.reserve(representations.size());
    for (const Var& other : representations) scores.push_back(dot(query, other));
    Var beta = softmax(stack(scores));
    out.weights.push_back(beta);
    out.attended.push_back(weighted_sum(beta, representations));
  }
  return out;
}

// ------------------------------------------------------------ whole dialogue

namespace {

std::vector<double> values_of(Var v) {
  const auto s = v.value().values();
  return {s.begin(), s.end()};
}

struct DirectionPass {
  std::vector<Var> representations;  // indexed by processing step
  std::vector<Var> alphas;
};

DirectionPass run_direction(Tape& tape, const BoundDirection& w, const ModelConfig& config,
                            const Dialogue& dialogue, bool reversed) {
  DialogueState state = initial_state(tape, config);
  DirectionPass pass;
  const std::size_t n = dialogue.size();
  for (std::size_t step = 0; step < n; ++step) {
    const Utterance& utt = dialogue.utterances[reversed ? n - 1 - step : step];
    Var u = tape.constant(Tensor::vector(utt.features));
    const std::size_t s = utt.speaker;

    AttentionResult ctx = attend_context(u, state.global_history, w.w_alpha);
    global_update(state, u, s, w.global);
    Var rep;
    if (config.party_state) {
      speaker_update(state, u, ctx.context, s, *w.party);
      if (config.listener == ListenerUpdate::kGru) {
        std::vector<Var> cues(config.parties);
        for (std::size_t i = 0; i < utt.listener_cues.size() && i < cues.size(); ++i) {
          if (!utt.listener_cues[i].empty()) cues[i] = tape.constant(Tensor::vector(utt.listener_cues[i]));
        }
        listener_update(state, config.listener, cues, ctx.context, s,
                        w.listener ? &*w.listener : nullptr);
      }
      rep = state.party[s];
    }
    if (config.emotion_gru) {
      state.emotion = emotion_update(state.emotion, config.party_state ? state.party[s] : ctx.context,
                                     *w.emotion);
      rep = state.emotion;
    }
    pass.representations.push_back(rep);
    pass.alphas.push_back(ctx.weights);
  }
  return pass;
}

void check_dialogue(const Dialogue& dialogue, const ModelConfig& config) {
  if (dialogue.utterances.empty()) {
    throw ShapeError("dialogue '" + dialogue.id + "' has no utterances");
  }
  for (std::size_t t = 0; t < dialogue.size(); ++t) {
    const Utterance& u = dialogue.utterances[t];
    if (u.features.size() != config.feature_dim) {
      throw ShapeError("dialogue '" + dialogue.id + "' utterance " + std::to_string(t) + ": " +
                       std::to_string(u.features.size()) + " features, model expects " +
                       std::to_string(config.feature_dim));
    }
    if (u.speaker >= config.parties) {
      throw ShapeError("dialogue '" + dialogue.id + "' utterance " + std::to_string(t) +
                       ": speaker " + std::to_string(u.speaker) + " outside " +
                       std::to_string(config.parties) + " parties");
    }
    for (std::size_t i = 0; i < u.listener_cues.size(); ++i) {
      if (!u.listener_cues[i].empty() && u.listener_cues[i].size() != config.cue_dim) {
        throw ShapeError("dialogue '" + dialogue.id + "' utterance " + std::to_string(t) +
                         ": listener cue of party " + std::to_string(i) + " has " +
                         std::to_string(u.listener_cues[i].size()) + " values, model expects " +
                         std::to_string(config.cue_dim));
      }
    }
  }
}

}  // namespace

DialogueGraph build_forward(Tape& tape, const BoundParameters& params, const ModelConfig& config,
                            const Dialogue& dialogue) {
  check_dialogue(dialogue, config);
  const std::size_t n = dialogue.size();
  DialogueGraph graph;
  graph.trace.dialogue_id = dialogue.id;
  graph.trace.steps.resize(n);

  DirectionPass fwd = run_direction(tape, params.forward, config, dialogue, false);
  std::vector<Var> reps = fwd.representations;
  for (std::size_t t = 0; t < n; ++t) graph.trace.steps[t].alpha = values_of(fwd.alphas[t]);

  if (config.bidirectional) {
    if (!params.backward) throw ShapeError("bidirectional config without backward parameters");
    DirectionPass bwd = run_direction(tape, *params.backward, config, dialogue, true);
    for (std::size_t t = 0; t < n; ++t) {
      reps[t] = concat(reps[t], bwd.representations[n - 1 - t]);
      graph.trace.steps[t].alpha_backward = values_of(bwd.alphas[n - 1 - t]);
    }
  }
  for (std::size_t t = 0; t < n; ++t) graph.trace.steps[t].representation = values_of(reps[t]);

  std::vector<Var> head_inputs = reps;
  if (config.emotion_attention) {
    if (!params.w_beta) throw ShapeError("emotion attention config without W_beta");
    EmotionAttentionResult att = emotion_attention(reps, *params.w_beta);
    head_inputs = att.attended;
    for (std::size_t t = 0; t < n; ++t) {
      graph.trace.steps[t].attended = values_of(att.attended[t]);
      graph.trace.beta.push_back(values_of(att.weights[t]));
    }
  }

  for (std::size_t t = 0; t < n; ++t) {
    UtteranceTrace& step = graph.trace.steps[t];
    if (config.mode == TaskMode::kClassification) {
      ClassifierOutput out = classify(head_inputs[t], params, config);
      graph.outputs.push_back(out.probabilities);
      step.predicted = out.predicted;
      step.output = values_of(out.probabilities);
    } else {
      Var out = predict_regression(head_inputs[t], params, config);
      graph.outputs.push_back(out);
      step.output = values_of(out);
    }
  }
  return graph;
}

ForwardTrace forward_dialogue(const Dialogue& dialogue, const Parameters& params,
                              const ModelConfig& config) {
  audit_parameters(params, config);
  Tape tape;
  BoundParameters bound = bind(tape, params);
  return build_forward(tape, bound, config, dialogue).trace;
}

ForwardTrace forward_bidirectional(const Dialogue& dialogue, const Parameters& params,
                                   const ModelConfig& config) {
  if (!config.bidirectional) {
    throw std::invalid_argument("forward_bidirectional: config has bidirectional off");
  }
  return forward_dialogue(dialogue, params, config);
}

}  // namespace drnn
