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

#ifndef SGIR_NN_H_
#define SGIR_NN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "sgir/autodiff.h"
#include "sgir/param_store.h"

namespace sgir {

inline constexpr double kLeakySlope = 0.01;

// Creates `{prefix}.layer{j}.weight` [dims[j] x dims[j+1]] (Glorot uniform)
// and `{prefix}.layer{j}.bias` [1 x dims[j+1]] (zeros) where missing.
void InitMlp(ParamStore& store, const std::string& prefix,
             const std::vector<std::int64_t>& dims);

// Affine layers with leaky ReLU between them and an identity output layer.
// Parameters are created on first use. Throws ShapeMismatch when the input
// width differs from dims[0] or stored shapes disagree with `dims`.
Var MlpApply(Tape& tape, ParamStore& store, const std::string& prefix,
             Var input, const std::vector<std::int64_t>& dims,
             double leaky_slope = kLeakySlope);

}  // namespace sgir

#endif  // SGIR_NN_H_
