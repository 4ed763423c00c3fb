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

#include "dialoguernn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dialoguernn/errors.hpp"

namespace drnn {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

std::size_t extent_product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

[[noreturn]] void shape_mismatch(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " +
                   shape_string(b));
}

void require_vector(const char* op, const Var& v) {
  if (v.shape().size() != 1) {
    throw ShapeError(std::string(op) + ": expected a vector, got " + shape_string(v.shape()));
  }
}

void require_same_tape(const Var& a, const Var& b) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
    throw std::invalid_argument("operands belong to different tapes");
  }
}

}  // namespace

// ---------------------------------------------------------------- Tensor

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_.size() > 2) {
    throw ShapeError("tensor rank above 2 is not supported: " + shape_string(shape_));
  }
  if (extent_product(shape_) != values_.size()) {
    throw ShapeError("tensor " + shape_string(shape_) + " cannot hold " +
                     std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::zeros(Shape shape) {
  const std::size_t n = extent_product(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return vector(std::vector<double>(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t = zeros({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

std::size_t Tensor::rows() const {
  if (shape_.empty()) return 1;
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.size() < 2) return 1;
  return shape_[1];
}

double Tensor::item() const {
  if (values_.size() != 1) {
    throw ShapeError("item() on non-scalar tensor " + shape_string(shape_));
  }
  return values_[0];
}

bool operator==(const Tensor& a, const Tensor& b) {
  return a.shape_ == b.shape_ &&
         (a.values_.empty() ||
          std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(double)) == 0);
}

// ---------------------------------------------------------------- Var / Tape

Tape& Var::tape() const {
  if (!tape_) throw std::logic_error("use of an unbound Var");
  return *tape_;
}
const Tensor& Var::value() const { return tape().value(index_); }
const Shape& Var::shape() const { return value().shape(); }
std::size_t Var::size() const { return value().size(); }
std::span<const double> Var::grad() const { return tape().grad(index_); }
bool Var::requires_grad() const { return tape().requires_grad(index_); }

Var Tape::leaf(Tensor value) { return record(std::move(value), true, {}, nullptr); }

Var Tape::constant(Tensor value) { return record(std::move(value), false, {}, nullptr); }

Var Tape::record(Tensor value, bool requires_grad, std::vector<std::size_t> inputs,
                 BackwardFn fn) {
  Node node;
  node.grad.assign(value.size(), 0.0);
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.inputs = std::move(inputs);
  node.backward = requires_grad ? std::move(fn) : nullptr;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owner(const Var& v) const {
  if (!v.valid() || &v.tape() != this || v.index() >= nodes_.size()) {
    throw std::invalid_argument("Var does not belong to this tape");
  }
}

void Tape::backward(Var output) {
  check_owner(output);
  if (!nodes_[output.index()].value.is_scalar()) {
    throw std::invalid_argument("backward() needs a scalar output, got " +
                                shape_string(nodes_[output.index()].value.shape()));
  }
  for (auto& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  visited_ = 0;
  nodes_[output.index()].grad[0] = 1.0;
  for (std::size_t i = output.index() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward) {
      n.backward(*this, i);
      ++visited_;
    }
  }
}

// ---------------------------------------------------------------- operations

namespace {

bool any_requires(const Tape& tape, std::initializer_list<std::size_t> ids) {
  return std::any_of(ids.begin(), ids.end(), [&](std::size_t i) { return tape.requires_grad(i); });
}

}  // namespace

Var matvec(Var w, Var x) {
  require_same_tape(w, x);
  const Tensor& W = w.value();
  const Tensor& X = x.value();
  if (!W.is_matrix() || !X.is_vector() || W.cols() != X.size()) {
    shape_mismatch("matvec", W.shape(), X.shape());
  }
  const std::size_t m = W.rows(), n = W.cols();
  std::vector<double> out(m, 0.0);
  const double* wp = W.values().data();
  const double* xp = X.values().data();
  for (std::size_t r = 0; r < m; ++r) {
    double acc = 0.0;
    const double* row = wp + r * n;
    for (std::size_t c = 0; c < n; ++c) acc += row[c] * xp[c];
    out[r] = acc;
  }
  Tape& tape = w.tape();
  const bool rg = any_requires(tape, {w.index(), x.index()});
  return tape.record(Tensor::vector(std::move(out)), rg, {w.index(), x.index()},
                     [m, n](Tape& t, std::size_t self) {
                       const std::size_t wi = t.input(self, 0), xi = t.input(self, 1);
                       const auto& g = t.grad(self);
                       if (t.requires_grad(wi)) {
                         auto& gw = t.grad(wi);
                         const auto xv = t.value(xi).values();
                         for (std::size_t r = 0; r < m; ++r) {
                           const double gr = g[r];
                           if (gr == 0.0) continue;
                           double* row = gw.data() + r * n;
                           for (std::size_t c = 0; c < n; ++c) row[c] += gr * xv[c];
                         }
                       }
                       if (t.requires_grad(xi)) {
                         auto& gx = t.grad(xi);
                         const double* wv = t.value(wi).values().data();
                         for (std::size_t r = 0; r < m; ++r) {
                           const double gr = g[r];
                           if (gr == 0.0) continue;
                           const double* row = wv + r * n;
                           for (std::size_t c = 0; c < n; ++c) gx[c] += gr * row[c];
                         }
                       }
                     });
}

Var matvec_transposed(Var w, Var x) {
  require_same_tape(w, x);
  const Tensor& W = w.value();
  const Tensor& X = x.value();
  if (!W.is_matrix() || !X.is_vector() || W.rows() != X.size()) {
    shape_mismatch("matvec_transposed", W.shape(), X.shape());
  }
  const std::size_t m = W.rows(), n = W.cols();
  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const double xr = X[r];
    for (std::size_t c = 0; c < n; ++c) out[c] += W.at(r, c) * xr;
  }
  Tape& tape = w.tape();
  const bool rg = any_requires(tape, {w.index(), x.index()});
  return tape.record(Tensor::vector(std::move(out)), rg, {w.index(), x.index()},
                     [m, n](Tape& t, std::size_t self) {
                       const std::size_t wi = t.input(self, 0), xi = t.input(self, 1);
                       const auto& g = t.grad(self);
                       if (t.requires_grad(wi)) {
                         auto& gw = t.grad(wi);
                         const auto xv = t.value(xi).values();
                         for (std::size_t r = 0; r < m; ++r)
                           for (std::size_t c = 0; c < n; ++c) gw[r * n + c] += xv[r] * g[c];
                       }
                       if (t.requires_grad(xi)) {
                         auto& gx = t.grad(xi);
                         const Tensor& wv = t.value(wi);
                         for (std::size_t r = 0; r < m; ++r) {
                           double acc = 0.0;
                           for (std::size_t c = 0; c < n; ++c) acc += wv.at(r, c) * g[c];
                           gx[r] += acc;
                         }
                       }
                     });
}

namespace {

template <class Fwd, class Bwd>
Var binary_elementwise(const char* op, Var a, Var b, Fwd fwd, Bwd bwd) {
  require_same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape() != B.shape()) shape_mismatch(op, A.shape(), B.shape());
  std::vector<double> out(A.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(A[i], B[i]);
  Tape& tape = a.tape();
  const bool rg = any_requires(tape, {a.index(), b.index()});
  return tape.record(Tensor(A.shape(), std::move(out)), rg, {a.index(), b.index()},
                     [bwd](Tape& t, std::size_t self) {
                       const std::size_t ai = t.input(self, 0), bi = t.input(self, 1);
                       const auto& g = t.grad(self);
                       const auto av = t.value(ai).values();
                       const auto bv = t.value(bi).values();
                       const bool ga = t.requires_grad(ai), gb = t.requires_grad(bi);
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         double da = 0.0, db = 0.0;
                         bwd(av[i], bv[i], da, db);
                         if (ga) t.grad(ai)[i] += g[i] * da;
                         if (gb) t.grad(bi)[i] += g[i] * db;
                       }
                     });
}

// Unary op whose derivative is expressed through input x and output y.
template <class Fwd, class Deriv>
Var unary_elementwise(Var x, Fwd fwd, Deriv deriv) {
  const Tensor& X = x.value();
  std::vector<double> out(X.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(X[i]);
  Tape& tape = x.tape();
  return tape.record(Tensor(X.shape(), std::move(out)), tape.requires_grad(x.index()),
                     {x.index()}, [deriv](Tape& t, std::size_t self) {
                       const std::size_t xi = t.input(self, 0);
                       const auto& g = t.grad(self);
                       const auto xv = t.value(xi).values();
                       const auto yv = t.value(self).values();
                       auto& gx = t.grad(xi);
                       for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv(xv[i], yv[i]);
                     });
}

}  // namespace

Var add(Var a, Var b) {
  return binary_elementwise(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double, double& da, double& db) {
        da = 1.0;
        db = 1.0;
      });
}

Var add(Var a, Var b, Var c) { return add(add(a, b), c); }

Var subtract(Var a, Var b) {
  return binary_elementwise(
      "subtract", a, b, [](double x, double y) { return x - y; },
      [](double, double, double& da, double& db) {
        da = 1.0;
        db = -1.0;
      });
}

Var hadamard(Var a, Var b) {
  return binary_elementwise(
      "hadamard", a, b, [](double x, double y) { return x * y; },
      [](double x, double y, double& da, double& db) {
        da = y;
        db = x;
      });
}

Var one_minus(Var a) {
  return unary_elementwise(
      a, [](double x) { return 1.0 - x; }, [](double, double) { return -1.0; });
}

Var scale(Var a, double factor) {
  return unary_elementwise(
      a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Var concat(Var a, Var b) {
  require_same_tape(a, b);
  require_vector("concat", a);
  require_vector("concat", b);
  const auto av = a.value().values();
  const auto bv = b.value().values();
  std::vector<double> out;
  out.reserve(av.size() + bv.size());
  out.insert(out.end(), av.begin(), av.end());
  out.insert(out.end(), bv.begin(), bv.end());
  Tape& tape = a.tape();
  const std::size_t p = av.size();
  const bool rg = any_requires(tape, {a.index(), b.index()});
  return tape.record(Tensor::vector(std::move(out)), rg, {a.index(), b.index()},
                     [p](Tape& t, std::size_t self) {
                       const std::size_t ai = t.input(self, 0), bi = t.input(self, 1);
                       const auto& g = t.grad(self);
                       if (t.requires_grad(ai)) {
                         auto& ga = t.grad(ai);
                         for (std::size_t i = 0; i < p; ++i) ga[i] += g[i];
                       }
                       if (t.requires_grad(bi)) {
                         auto& gb = t.grad(bi);
                         for (std::size_t i = p; i < g.size(); ++i) gb[i - p] += g[i];
                       }
                     });
}

Var sigmoid(Var x) {
  return unary_elementwise(
      x,
      [](double v) {
        // Split form keeps exp() from overflowing for large |v|.
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var x) {
  return unary_elementwise(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var x) {
  return unary_elementwise(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var activation(Activation kind, Var x) {
  switch (kind) {
    case Activation::kSigmoid:
      return sigmoid(x);
    case Activation::kTanh:
      return tanh(x);
    case Activation::kRelu:
      return relu(x);
  }
  throw std::invalid_argument("unknown activation");
}

Var softmax(Var x) {
  require_vector("softmax", x);
  const auto xv = x.value().values();
  if (xv.empty()) throw ShapeError("softmax: empty input");
  const double mx = *std::max_element(xv.begin(), xv.end());
  std::vector<double> out(xv.size());
  double total = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    out[i] = std::exp(xv[i] - mx);
    total += out[i];
  }
  for (double& v : out) v /= total;
  Tape& tape = x.tape();
  return tape.record(Tensor::vector(std::move(out)), tape.requires_grad(x.index()), {x.index()},
                     [](Tape& t, std::size_t self) {
                       const std::size_t xi = t.input(self, 0);
                       const auto& g = t.grad(self);
                       const auto y = t.value(self).values();
                       double inner = 0.0;
                       for (std::size_t i = 0; i < g.size(); ++i) inner += g[i] * y[i];
                       auto& gx = t.grad(xi);
                       for (std::size_t i = 0; i < g.size(); ++i) gx[i] += y[i] * (g[i] - inner);
                     });
}

Var log(Var x) {
  return unary_elementwise(
      x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var abs(Var x) {
  return unary_elementwise(
      x, [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Var dot(Var a, Var b) {
  require_same_tape(a, b);
  require_vector("dot", a);
  require_vector("dot", b);
  if (a.size() != b.size()) shape_mismatch("dot", a.shape(), b.shape());
  const auto av = a.value().values();
  const auto bv = b.value().values();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  Tape& tape = a.tape();
  const bool rg = any_requires(tape, {a.index(), b.index()});
  return tape.record(Tensor::scalar(acc), rg, {a.index(), b.index()},
                     [](Tape& t, std::size_t self) {
                       const std::size_t ai = t.input(self, 0), bi = t.input(self, 1);
                       const double g = t.grad(self)[0];
                       const auto av = t.value(ai).values();
                       const auto bv = t.value(bi).values();
                       if (t.requires_grad(ai)) {
                         auto& ga = t.grad(ai);
                         for (std::size_t i = 0; i < av.size(); ++i) ga[i] += g * bv[i];
                       }
                       if (t.requires_grad(bi)) {
                         auto& gb = t.grad(bi);
                         for (std::size_t i = 0; i < bv.size(); ++i) gb[i] += g * av[i];
                       }
                     });
}

Var sum(Var x) {
  const auto xv = x.value().values();
  double acc = 0.0;
  for (double v : xv) acc += v;
  Tape& tape = x.tape();
  return tape.record(Tensor::scalar(acc), tape.requires_grad(x.index()), {x.index()},
                     [](Tape& t, std::size_t self) {
                       const double g = t.grad(self)[0];
                       for (double& gx : t.grad(t.input(self, 0))) gx += g;
                     });
}

Var sum_of_squares(Var x) {
  const auto xv = x.value().values();
  double acc = 0.0;
  for (double v : xv) acc += v * v;
  Tape& tape = x.tape();
  return tape.record(Tensor::scalar(acc), tape.requires_grad(x.index()), {x.index()},
                     [](Tape& t, std::size_t self) {
                       const std::size_t xi = t.input(self, 0);
                       const double g = t.grad(self)[0];
                       const auto xv = t.value(xi).values();
                       auto& gx = t.grad(xi);
                       for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += 2.0 * g * xv[i];
                     });
}

Var element(Var x, std::size_t i) {
  if (i >= x.size()) {
    throw ShapeError("element: index " + std::to_string(i) + " outside " +
                     shape_string(x.shape()));
  }
  Tape& tape = x.tape();
  return tape.record(Tensor::scalar(x.value()[i]), tape.requires_grad(x.index()), {x.index()},
                     [i](Tape& t, std::size_t self) {
                       t.grad(t.input(self, 0))[i] += t.grad(self)[0];
                     });
}

Var stack(std::span<const Var> scalars) {
  if (scalars.empty()) throw ShapeError("stack: no operands");
  Tape& tape = scalars.front().tape();
  std::vector<double> out;
  std::vector<std::size_t> ids;
  bool rg = false;
  for (const Var& s : scalars) {
    require_same_tape(scalars.front(), s);
    if (s.size() != 1) throw ShapeError("stack: operand " + shape_string(s.shape()) + " is not scalar");
    out.push_back(s.value()[0]);
    ids.push_back(s.index());
    rg = rg || s.requires_grad();
  }
  return tape.record(Tensor::vector(std::move(out)), rg, std::move(ids),
                     [](Tape& t, std::size_t self) {
                       const auto& g = t.grad(self);
                       const auto& in = t.inputs(self);
                       for (std::size_t k = 0; k < in.size(); ++k) {
                         if (t.requires_grad(in[k])) t.grad(in[k])[0] += g[k];
                       }
                     });
}

Var weighted_sum(Var weights, std::span<const Var> rows) {
  require_vector("weighted_sum", weights);
  if (weights.size() != rows.size() || rows.empty()) {
    throw ShapeError("weighted_sum: " + std::to_string(weights.size()) + " weights for " +
                     std::to_string(rows.size()) + " rows");
  }
  const std::size_t d = rows.front().size();
  std::vector<std::size_t> ids{weights.index()};
  bool rg = weights.requires_grad();
  std::vector<double> out(d, 0.0);
  const auto w = weights.value().values();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require_same_tape(weights, rows[k]);
    require_vector("weighted_sum", rows[k]);
    if (rows[k].size() != d) shape_mismatch("weighted_sum", rows.front().shape(), rows[k].shape());
    const auto rv = rows[k].value().values();
    for (std::size_t i = 0; i < d; ++i) out[i] += w[k] * rv[i];
    ids.push_back(rows[k].index());
    rg = rg || rows[k].requires_grad();
  }
  Tape& tape = weights.tape();
  return tape.record(Tensor::vector(std::move(out)), rg, std::move(ids),
                     [](Tape& t, std::size_t self) {
                       const auto& g = t.grad(self);
                       const auto& in = t.inputs(self);
                       const std::size_t wi = in[0];
                       const auto w = t.value(wi).values();
                       for (std::size_t k = 1; k < in.size(); ++k) {
                         const auto rv = t.value(in[k]).values();
                         if (t.requires_grad(wi)) {
                           double acc = 0.0;
                           for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * rv[i];
                           t.grad(wi)[k - 1] += acc;
                         }
                         if (t.requires_grad(in[k])) {
                           auto& gr = t.grad(in[k]);
                           for (std::size_t i = 0; i < g.size(); ++i) gr[i] += w[k - 1] * g[i];
                         }
                       }
                     });
}

}  // namespace drnn
