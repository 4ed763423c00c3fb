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

#include "dialoguernn/gru.hpp"

#include <cmath>

#include "dialoguernn/errors.hpp"

namespace drnn {

GruParams make_gru_zero(std::size_t hidden, std::size_t input) {
  GruParams p;
  p.wx_r = p.wx_z = p.wx_c = Tensor::zeros({hidden, input});
  p.wh_r = p.wh_z = p.wh_c = Tensor::zeros({hidden, hidden});
  p.b_r = p.b_z = p.b_c = Tensor::zeros({hidden});
  return p;
}

GruParams make_gru_random(std::size_t hidden, std::size_t input, std::mt19937_64& rng) {
  GruParams p = make_gru_zero(hidden, input);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Tensor* t : {&p.wx_r, &p.wx_z, &p.wx_c, &p.wh_r, &p.wh_z, &p.wh_c}) {
    for (double& v : t->values()) v = dist(rng);
  }
  return p;
}

std::size_t gru_hidden_size(const GruParams& p) { return p.b_r.size(); }
std::size_t gru_input_size(const GruParams& p) { return p.wx_r.cols(); }

void check_gru_shapes(const GruParams& p, const std::string& name) {
  const std::size_t h = gru_hidden_size(p);
  const std::size_t in = gru_input_size(p);
  const Shape wx{h, in}, wh{h, h}, b{h};
  auto expect = [&](const Tensor& t, const Shape& s, const char* table) {
    if (t.shape() != s) {
      throw ShapeError(name + "." + table + ": expected " + shape_string(s) + ", got " +
                       shape_string(t.shape()));
    }
  };
  expect(p.wx_r, wx, "Wx_r");
  expect(p.wx_z, wx, "Wx_z");
  expect(p.wx_c, wx, "Wx_c");
  expect(p.wh_r, wh, "Wh_r");
  expect(p.wh_z, wh, "Wh_z");
  expect(p.wh_c, wh, "Wh_c");
  expect(p.b_r, b, "b_r");
  expect(p.b_z, b, "b_z");
  expect(p.b_c, b, "b_c");
}

BoundGru bind(Tape& tape, const GruParams& p) {
  BoundGru b;
  GruParams copy = p;
  GruWeights<Var>::visit([&](const char*, Var& v, Tensor& t) { v = tape.leaf(std::move(t)); }, b,
                         copy);
  return b;
}

Var gru_step(const BoundGru& p, Var h_prev, Var x) {
  const std::size_t hidden = p.b_r.size();
  if (h_prev.shape() != Shape{hidden}) {
    throw ShapeError("gru_step: state " + shape_string(h_prev.shape()) + " vs hidden size " +
                     std::to_string(hidden));
  }
  if (x.shape() != Shape{p.wx_r.shape()[1]}) {
    throw ShapeError("gru_step: input " + shape_string(x.shape()) + " vs input weights " +
                     shape_string(p.wx_r.shape()));
  }
  Var r = sigmoid(add(matvec(p.wx_r, x), matvec(p.wh_r, h_prev), p.b_r));
  Var z = sigmoid(add(matvec(p.wx_z, x), matvec(p.wh_z, h_prev), p.b_z));
  Var candidate = tanh(add(matvec(p.wx_c, x), matvec(p.wh_c, hadamard(r, h_prev)), p.b_c));
  return add(hadamard(one_minus(z), h_prev), hadamard(z, candidate));
}

}  // namespace drnn
