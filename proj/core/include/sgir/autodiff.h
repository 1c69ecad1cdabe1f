// Copyright 2026 The SGIR Authors.
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

#ifndef SGIR_AUTODIFF_H_
#define SGIR_AUTODIFF_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgir/param_store.h"
#include "sgir/tensor.h"

namespace sgir {

class Tape;

// Handle to a matrix-valued node recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  std::int64_t rows() const { return value().rows(); }
  std::int64_t cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Records one forward pass for reverse-mode differentiation. Parameter leaves
// write their gradients straight into the owning ParamStore. A tape supports a
// single Backward(); re-run the forward pass on a fresh tape for another.
class Tape {
 public:
  // Receives the gradient of the loss w.r.t. this node's value.
  using BackwardFn = std::function<void(Tape&, const Tensor& grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Tensor value);
  // Leaf bound to an existing store entry. Repeated calls with the same name
  // return the same node.
  Var Parameter(ParamStore& store, const std::string& name);

  // Reverse sweep from a 1x1 `loss`. Throws GraphConsumed on a second call.
  void Backward(Var loss);

  const Tensor& value(int id) const { return *nodes_[id].value; }
  bool RequiresGrad(int id) const { return nodes_[id].requires_grad; }
  bool RequiresGrad(Var v) const { return RequiresGrad(v.id()); }
  // Gradient buffer of a node, zero-filled on first use. For parameter leaves
  // this is the store's gradient tensor.
  Tensor& GradBuffer(int id);

  // Builds a node; `backward` may be empty for non-differentiable outputs.
  Var Record(Tensor value, std::span<const Var> parents, BackwardFn backward);
  Var Record(Tensor value, std::initializer_list<Var> parents,
             BackwardFn backward) {
    return Record(std::move(value),
                  std::span<const Var>(parents.begin(), parents.size()),
                  std::move(backward));
  }

  // Sign bits of every LeakyRelu input seen on this tape, in order. Finite
  // difference checks compare patterns to detect kink crossings.
  std::vector<std::uint8_t>& activation_pattern() { return pattern_; }
  const std::vector<std::uint8_t>& activation_pattern() const {
    return pattern_;
  }

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* value = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardFn backward;
    ParamStore::Entry* param = nullptr;
  };

  std::deque<Node> nodes_;
  std::unordered_map<std::string, int> param_nodes_;
  std::vector<std::uint8_t> pattern_;
  bool consumed_ = false;
};

// ---- Differentiable operations (all values are matrices) -------------------

Var MatMul(Var a, Var b);
// x * w + b with `b` a [1 x cols] row broadcast over rows of x.
Var Linear(Var x, Var w, Var b);
Var LeakyRelu(Var x, double slope);
Var Sigmoid(Var x);
// out[i] = table[indices[i]]
Var GatherRows(Var table, std::span<const int> indices);
Var ConcatCols(std::span<const Var> parts);
Var ConcatCols(std::initializer_list<Var> parts);
Var SliceCols(Var x, std::int64_t begin, std::int64_t count);
Var Reshape(Var x, std::int64_t rows, std::int64_t cols);

// Scatter-mean of per-triplet candidates into object rows: each object row is
// the mean of the subject candidates of triplets where it is the subject and
// the object candidates of triplets where it is the object. Objects in no
// triplet keep their row from `previous`.
Var MeanPoolObjects(Var subject_candidates, Var object_candidates,
                    std::span<const int> subject_index,
                    std::span<const int> object_index, Var previous);

// Maps raw [N x 4] outputs (a, b, c, d) to valid boxes:
//   x0 = s(a), y0 = s(b), x1 = x0 + s(c) * (1 - x0), y1 = y0 + s(d) * (1 - y0)
// where s(z) = e + (1 - 2e) * sigmoid(z), e = 1e-6, keeps every coordinate
// strictly inside (0, 1).
Var BoxSquash(Var raw);

// Mean over rows of -log softmax(logits)[target]. Row max is subtracted
// before exponentiation.
Var SoftmaxCrossEntropy(Var logits, std::span<const int> targets);
// Mean over entries of binary cross-entropy with logits; targets in [0, 1].
Var SigmoidBinaryCrossEntropy(Var logits, const Tensor& targets);
// Mean of squared differences.
Var MeanSquaredError(Var pred, Var target);
Var MeanSquaredError(Var pred, const Tensor& target);
// sum_i weights[i] * terms[i] over 1x1 terms.
Var WeightedSum(std::span<const Var> terms, std::span<const double> weights);
Var SumSquares(Var x);
Var Sum(Var x);

}  // namespace sgir

#endif  // SGIR_AUTODIFF_H_
