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
#include <random>
#include <string>

#include "dialoguernn/tensor.hpp"

namespace drnn {

/// The nine tables of one gated recurrent unit. Instantiated with Tensor for
/// stored parameters and with Var for parameters bound to a tape.
///
///   r  = σ(Wx_r·x + Wh_r·h + b_r)
///   z  = σ(Wx_z·x + Wh_z·h + b_z)
///   c̃  = tanh(Wx_c·x + Wh_c·(r⊙h) + b_c)
///   h' = (1 − z)⊙h + z⊙c̃
template <class T>
struct GruWeights {
  T wx_r, wx_z, wx_c;  // hidden × input
  T wh_r, wh_z, wh_c;  // hidden × hidden
  T b_r, b_z, b_c;     // hidden

  /// Calls fn(suffix, table) for the nine tables of each argument in lockstep.
  template <class Fn, class... Others>
  static void visit(Fn&& fn, GruWeights& self, Others&... others) {
    fn("Wx_r", self.wx_r, others.wx_r...);
    fn("Wx_z", self.wx_z, others.wx_z...);
    fn("Wx_c", self.wx_c, others.wx_c...);
    fn("Wh_r", self.wh_r, others.wh_r...);
    fn("Wh_z", self.wh_z, others.wh_z...);
    fn("Wh_c", self.wh_c, others.wh_c...);
    fn("b_r", self.b_r, others.b_r...);
    fn("b_z", self.b_z, others.b_z...);
    fn("b_c", self.b_c, others.b_c...);
  }
};

using GruParams = GruWeights<Tensor>;
using BoundGru = GruWeights<Var>;

GruParams make_gru_zero(std::size_t hidden, std::size_t input);

/// Tables uniform in [−1/√hidden, 1/√hidden]; biases zero.
GruParams make_gru_random(std::size_t hidden, std::size_t input, std::mt19937_64& rng);

std::size_t gru_hidden_size(const GruParams& p);
std::size_t gru_input_size(const GruParams& p);

/// Throws ShapeError unless the nine tables agree on hidden/input extents.
void check_gru_shapes(const GruParams& p, const std::string& name = "gru");

BoundGru bind(Tape& tape, const GruParams& p);

/// One recurrence step h' = GRU(h_prev, x) recorded on the tape.
Var gru_step(const BoundGru& p, Var h_prev, Var x);

}  // namespace drnn
