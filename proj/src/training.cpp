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

#include "dialoguernn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "dialoguernn/errors.hpp"
#include "dialoguernn/evaluation.hpp"
#include "dialoguernn/format.hpp"
#include "parallel.hpp"

namespace drnn {

void TrainConfig::validate() const {
  std::vector<std::string> errors;
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    errors.push_back("learning_rate must be > 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0)) errors.push_back("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) errors.push_back("beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) errors.push_back("epsilon must be > 0");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) errors.push_back("l2 must be >= 0");
  if (patience && *patience == 0) errors.push_back("patience must be >= 1 when set");
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

// ------------------------------------------------------------------ losses

LossValue classification_loss(const std::vector<std::vector<double>>& probabilities,
                              std::span<const std::size_t> labels, const Parameters& params,
                              double lambda, bool clamp) {
  if (probabilities.size() != labels.size()) {
    throw std::invalid_argument("classification_loss: " + std::to_string(probabilities.size()) +
                                " probability rows for " + std::to_string(labels.size()) +
                                " labels");
  }
  if (labels.empty()) throw std::invalid_argument("classification_loss: no utterances");
  LossValue out;
  double nll = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= probabilities[i].size()) {
      throw std::invalid_argument("classification_loss: label " + std::to_string(labels[i]) +
                                  " outside the probability row");
    }
    double p = probabilities[i][labels[i]];
    if (clamp && p < kProbabilityFloor) {
      p = kProbabilityFloor;
      ++out.clamped;
    }
    nll -= std::log(p);
  }
  out.value = nll / static_cast<double>(labels.size()) + lambda * squared_norm(params);
  return out;
}

LossValue classification_loss(std::span<const ForwardTrace> traces,
                              std::span<const Dialogue> dialogues, const Parameters& params,
                              double lambda, bool clamp) {
  if (traces.size() != dialogues.size()) {
    throw std::invalid_argument("classification_loss: trace/dialogue count mismatch");
  }
  std::vector<std::vector<double>> probs;
  std::vector<std::size_t> labels;
  for (std::size_t d = 0; d < traces.size(); ++d) {
    if (traces[d].steps.size() != dialogues[d].size()) {
      throw std::invalid_argument("classification_loss: dialogue '" + dialogues[d].id +
                                  "' trace length mismatch");
    }
    for (std::size_t t = 0; t < dialogues[d].size(); ++t) {
      const auto& label = dialogues[d].utterances[t].label;
      if (!label) {
        throw ValidationError("dialogue '" + dialogues[d].id + "' utterance " +
                              std::to_string(t) + " has no label");
      }
      probs.push_back(traces[d].steps[t].output);
      labels.push_back(*label);
    }
  }
  return classification_loss(probs, labels, params, lambda, clamp);
}

double regression_loss(const std::vector<std::vector<double>>& predictions,
                       const std::vector<std::vector<double>>& targets, const Parameters& params,
                       double lambda) {
  if (predictions.size() != targets.size()) {
    throw ShapeError("regression_loss: " + std::to_string(predictions.size()) +
                     " predictions for " + std::to_string(targets.size()) + " targets");
  }
  if (targets.empty()) throw std::invalid_argument("regression_loss: no utterances");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (predictions[i].size() != targets[i].size()) {
      throw ShapeError("regression_loss: row " + std::to_string(i) + " has " +
                       std::to_string(predictions[i].size()) + " predictions for " +
                       std::to_string(targets[i].size()) + " targets");
    }
    for (std::size_t k = 0; k < targets[i].size(); ++k) {
      total += std::fabs(predictions[i][k] - targets[i][k]);
      ++count;
    }
  }
  return total / static_cast<double>(count == 0 ? 1 : count) + lambda * squared_norm(params);
}

TapeLoss dialogue_loss(Tape& tape, const DialogueGraph& graph, const Dialogue& dialogue,
                       const BoundParameters& params, const ModelConfig& config, double lambda,
                       bool clamp) {
  const std::size_t n = dialogue.size();
  if (graph.outputs.size() != n) throw ShapeError("dialogue_loss: output count mismatch");
  TapeLoss out;
  std::vector<Var> terms;
  terms.reserve(n);
  double denom = static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) {
    const Utterance& u = dialogue.utterances[t];
    if (config.mode == TaskMode::kClassification) {
      if (!u.label) {
        throw ValidationError("dialogue '" + dialogue.id + "' utterance " + std::to_string(t) +
                              " has no label");
      }
      Var p = element(graph.outputs[t], *u.label);
      if (clamp && p.value().item() < kProbabilityFloor) {
        terms.push_back(tape.constant(Tensor::scalar(-std::log(kProbabilityFloor))));
        ++out.clamped;
      } else {
        terms.push_back(scale(log(p), -1.0));
      }
    } else {
      if (!u.targets) {
        throw ValidationError("dialogue '" + dialogue.id + "' utterance " + std::to_string(t) +
                              " has no targets");
      }
      Var target = tape.constant(Tensor::vector(*u.targets));
      terms.push_back(sum(abs(subtract(graph.outputs[t], target))));
    }
  }
  if (config.mode == TaskMode::kRegression) denom *= static_cast<double>(config.output_dim);
  Var data = scale(sum(stack(terms)), 1.0 / denom);
  out.data_term = data.value().item();
  out.total = data;
  if (lambda > 0.0) {
    std::vector<Var> squares;
    BoundParameters view = params;
    BoundParameters::visit([&](const std::string&, Var& v) { squares.push_back(sum_of_squares(v)); },
                           view);
    out.total = add(data, scale(sum(stack(squares)), lambda));
  }
  return out;
}

// ------------------------------------------------------------------ Adam

AdamState AdamState::like(const Parameters& params) {
  AdamState s;
  s.first_moment = params;
  Parameters::visit([](const std::string&, Tensor& t) { t = Tensor::zeros(t.shape()); },
                    s.first_moment);
  s.second_moment = s.first_moment;
  return s;
}

AdamStepResult adam_step(Parameters& params, const Parameters& grads, AdamState& state,
                         const TrainConfig& config) {
  // visit() takes mutable references; the gradient set is only read.
  Parameters& g = const_cast<Parameters&>(grads);
  AdamStepResult result;
  Parameters::visit(
      [&](const std::string& name, Tensor& p, Tensor& gt, Tensor& m, Tensor& v) {
        if (gt.shape() != p.shape() || m.shape() != p.shape() || v.shape() != p.shape()) {
          throw ShapeError("adam_step: " + name + " is " + shape_string(p.shape()) +
                           " but its gradient is " + shape_string(gt.shape()));
        }
        if (result.applied) {
          for (double x : gt.values()) {
            if (!std::isfinite(x)) {
              result.applied = false;
              result.rejected_parameter = name;
              break;
            }
          }
        }
      },
      params, g, state.first_moment, state.second_moment);
  if (!result.applied) return result;

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  Parameters::visit(
      [&](const std::string&, Tensor& p, Tensor& gt, Tensor& m, Tensor& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
          const double gi = gt[i];
          m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * gi;
          v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * gi * gi;
          const double m_hat = m[i] / c1;
          const double v_hat = v[i] / c2;
          p[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
        }
      },
      params, g, state.first_moment, state.second_moment);
  return result;
}

// ------------------------------------------------------------------ loop

std::string epoch_csv_header() { return "epoch,train_loss,val_metric,wall_ms"; }

std::string epoch_csv_row(const EpochRecord& r) {
  return std::to_string(r.epoch) + "," + format_double(r.train_loss) + "," +
         (r.val_metric ? format_double(*r.val_metric) : std::string()) + "," +
         format_double(r.wall_ms);
}

TrainResult train(const Corpus& train_set, const Corpus* validation, const ModelConfig& model,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  model.validate();
  return train_from(make_parameters(model, config.seed), train_set, validation, model, config,
                    on_epoch);
}

TrainResult train_from(Parameters init, const Corpus& train_set, const Corpus* validation,
                       const ModelConfig& model, const TrainConfig& config,
                       const EpochCallback& on_epoch) {
  config.validate();
  model.validate();
  check_compatible(train_set.manifest, model);
  if (validation) check_compatible(validation->manifest, model);
  if (train_set.dialogues.empty()) throw ValidationError("training corpus has no dialogues");
  if (validation && validation->dialogues.empty()) {
    throw ValidationError("validation corpus has no dialogues");
  }
  audit_parameters(init, model);

  TrainResult result;
  result.parameters = init;
  Parameters params = std::move(init);
  AdamState adam = AdamState::like(params);
  // Shuffling draws from its own stream so it does not shift initialization.
  std::seed_seq seq{config.seed, std::uint64_t{0x5eed}};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> order(train_set.dialogues.size());
  std::iota(order.begin(), order.end(), 0);

  const bool higher_is_better = model.mode == TaskMode::kClassification;
  std::optional<double> best;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double weighted_loss = 0.0;
    std::size_t utterances = 0;
    for (std::size_t i : order) {
      const Dialogue& dialogue = train_set.dialogues[i];
      Tape tape;
      BoundParameters bound = bind(tape, params);
      DialogueGraph graph = build_forward(tape, bound, model, dialogue);
      TapeLoss loss = dialogue_loss(tape, graph, dialogue, bound, model, config.l2);
      if (loss.clamped) {
        result.log.push_back("epoch " + std::to_string(epoch) + " dialogue '" + dialogue.id +
                             "': true-class probability clamped at 1e-12 for " +
                             std::to_string(loss.clamped) + " utterance(s)");
      }
      tape.backward(loss.total);
      AdamStepResult step = adam_step(params, gradients(bound), adam, config);
      if (!step.applied) {
        result.log.push_back("epoch " + std::to_string(epoch) + " dialogue '" + dialogue.id +
                             "': non-finite gradient in " + step.rejected_parameter +
                             ", step skipped");
      }
      weighted_loss += loss.total.value().item() * static_cast<double>(dialogue.size());
      utterances += dialogue.size();
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = weighted_loss / static_cast<double>(utterances);
    bool improved = true;
    if (validation) {
      const double metric = selection_metric(*validation, predict_corpus(*validation, params, model));
      record.val_metric = metric;
      improved = !best || (higher_is_better ? metric > *best : metric < *best);
      if (improved) best = metric;
    }
    if (improved) {
      result.parameters = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (config.record_wall_time) {
      record.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    }
    result.epochs.push_back(record);
    if (on_epoch && !on_epoch(record, params)) break;
    if (config.patience && since_best >= *config.patience) break;
  }
  result.final_parameters = std::move(params);
  return result;
}

// ------------------------------------------------------------------ grid

namespace {

std::size_t whole(const std::string& name, double v) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e9) {
    throw ValidationError("grid axis " + name + ": " + format_double(v) +
                          " is not a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

void apply_axis(ModelConfig& m, TrainConfig& t, const std::string& name, double v) {
  if (name == "learning_rate") {
    t.learning_rate = v;
  } else if (name == "l2") {
    t.l2 = v;
  } else if (name == "beta1") {
    t.beta1 = v;
  } else if (name == "beta2") {
    t.beta2 = v;
  } else if (name == "epsilon") {
    t.epsilon = v;
  } else if (name == "epochs") {
    t.epochs = whole(name, v);
  } else if (name == "seed") {
    t.seed = whole(name, v);
  } else if (name == "global_dim") {
    m.global_dim = whole(name, v);
  } else if (name == "party_dim") {
    m.party_dim = whole(name, v);
  } else if (name == "emotion_dim") {
    m.emotion_dim = whole(name, v);
  } else if (name == "hidden_dim") {
    m.hidden_dim = whole(name, v);
  } else if (name == "state_dim") {
    m.global_dim = m.party_dim = m.emotion_dim = m.hidden_dim = whole(name, v);
  } else {
    throw ValidationError("unknown grid axis '" + name + "'");
  }
}

}  // namespace

std::vector<std::string> grid_axis_names() {
  return {"learning_rate", "l2",        "beta1",       "beta2",      "epsilon",   "epochs",
          "seed",          "global_dim", "party_dim", "emotion_dim", "hidden_dim", "state_dim"};
}

GridResult grid_search(const Corpus& train_set, const Corpus& validation,
                       const ModelConfig& model, const TrainConfig& config,
                       const std::vector<GridAxis>& grid, std::size_t workers) {
  if (grid.empty()) throw ValidationError("grid search needs at least one axis");
  std::vector<std::string> errors;
  std::set<std::string> seen;
  std::size_t total = 1;
  for (const GridAxis& axis : grid) {
    if (axis.values.empty()) errors.push_back("grid axis " + axis.name + " has no values");
    if (!seen.insert(axis.name).second) errors.push_back("grid axis " + axis.name + " repeated");
    total *= axis.values.size();
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));

  // Resolve every trial before training so bad values fail fast.
  std::vector<GridTrial> trials(total);
  for (std::size_t i = 0; i < total; ++i) {
    GridTrial& trial = trials[i];
    trial.grid_index = i;
    trial.model = model;
    trial.train = config;
    std::size_t rest = i;
    std::vector<std::pair<std::string, double>> picked(grid.size());
    for (std::size_t a = grid.size(); a-- > 0;) {
      const std::size_t k = rest % grid[a].values.size();
      rest /= grid[a].values.size();
      picked[a] = {grid[a].name, grid[a].values[k]};
    }
    for (const auto& [name, value] : picked) apply_axis(trial.model, trial.train, name, value);
    trial.model.validate();
    trial.train.validate();
    trial.assignment = std::move(picked);
  }

  detail::run_indexed(total, workers, [&](std::size_t i) {
    GridTrial& trial = trials[i];
    TrainResult r = train(train_set, &validation, trial.model, trial.train);
    trial.predictions = predict_corpus(validation, r.parameters, trial.model);
    trial.metric = selection_metric(validation, trial.predictions);
  });

  GridResult result;
  result.higher_is_better = model.mode == TaskMode::kClassification;
  std::stable_sort(trials.begin(), trials.end(), [&](const GridTrial& a, const GridTrial& b) {
    return result.higher_is_better ? a.metric > b.metric : a.metric < b.metric;
  });
  result.ranked = std::move(trials);
  return result;
}

}  // namespace drnn
