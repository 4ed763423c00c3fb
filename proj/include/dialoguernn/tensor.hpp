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
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace drnn {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

/// Dense row-major tensor of doubles. Only rank 0 (scalar), rank 1 (vector)
/// and rank 2 (matrix) are used by the model.
class Tensor {
 public:
  Tensor() = default;
  /// Throws ShapeError unless values.size() equals the product of extents.
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape);
  static Tensor scalar(double value);
  static Tensor vector(std::vector<double> values);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor identity(std::size_t n);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;
  bool is_scalar() const noexcept { return shape_.empty(); }
  bool is_vector() const noexcept { return shape_.size() == 1; }
  bool is_matrix() const noexcept { return shape_.size() == 2; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * shape_[1] + c]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * shape_[1] + c]; }
  double item() const;

  /// Bitwise-equal shapes and values (NaN payloads included).
  friend bool operator==(const Tensor& a, const Tensor& b);

 private:
  Shape shape_;
  std::vector<double> values_;
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid for the
/// lifetime of its tape.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape& tape() const;
  std::size_t index() const noexcept { return index_; }

  const Tensor& value() const;
  const Shape& shape() const;
  std::size_t size() const;
  /// Gradient accumulated by the last Tape::backward call.
  std::span<const double> grad() const;
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

/// Records primitive operations in execution order and replays them in
/// reverse to accumulate gradients. Single-threaded; distinct tapes are
/// independent.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = delete;
  Tape& operator=(Tape&&) = delete;

  /// A trainable input whose gradient is collected by backward().
  Var leaf(Tensor value);
  /// A non-differentiated input (features, zero initial states).
  Var constant(Tensor value);

  /// Seeds d(output)/d(output) = 1 and visits every recorded operation once,
  /// newest first. Throws std::invalid_argument for a non-scalar output or a
  /// foreign Var. Gradients from a previous call are cleared first.
  void backward(Var output);

  std::size_t size() const noexcept { return nodes_.size(); }
  /// Number of nodes whose backward function ran in the last backward().
  std::size_t visited_in_last_backward() const noexcept { return visited_; }

  // Used by the primitive operations.
  Var record(Tensor value, bool requires_grad, std::vector<std::size_t> inputs, BackwardFn fn);
  const Tensor& value(std::size_t i) const { return nodes_[i].value; }
  std::vector<double>& grad(std::size_t i) { return nodes_[i].grad; }
  const std::vector<double>& grad(std::size_t i) const { return nodes_[i].grad; }
  bool requires_grad(std::size_t i) const { return nodes_[i].requires_grad; }
  std::size_t input(std::size_t node, std::size_t k) const { return nodes_[node].inputs[k]; }
  const std::vector<std::size_t>& inputs(std::size_t node) const { return nodes_[node].inputs; }
  void check_owner(const Var& v) const;

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::size_t visited_ = 0;
};

enum class Activation { kSigmoid, kTanh, kRelu };

// Primitive differentiable operations. All operands must live on the same
// tape; extents are checked and mismatches raise ShapeError naming both shapes.

/// W[m×n]·x[n] → [m]
Var matvec(Var w, Var x);
/// W[m×n]ᵀ·x[m] → [n]
Var matvec_transposed(Var w, Var x);
Var add(Var a, Var b);
Var add(Var a, Var b, Var c);
Var subtract(Var a, Var b);
Var hadamard(Var a, Var b);
/// 1 − a, elementwise.
Var one_minus(Var a);
Var scale(Var a, double factor);
/// a ⊕ b for vectors; either operand may be empty.
Var concat(Var a, Var b);
Var activation(Activation kind, Var x);
Var sigmoid(Var x);
Var tanh(Var x);
Var relu(Var x);
/// Max-subtracted softmax over a non-empty vector.
Var softmax(Var x);
/// Elementwise natural log.
Var log(Var x);
/// Elementwise |x|; subgradient 0 at 0.
Var abs(Var x);
/// Scalar results.
Var dot(Var a, Var b);
Var sum(Var x);
Var sum_of_squares(Var x);
Var element(Var x, std::size_t i);
/// Packs scalars into a vector.
Var stack(std::span<const Var> scalars);
/// Σ_i weights[i]·rows[i] for a weight vector and equally sized vectors.
Var weighted_sum(Var weights, std::span<const Var> rows);

}  // namespace drnn
