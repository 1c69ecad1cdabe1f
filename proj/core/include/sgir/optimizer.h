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

#ifndef SGIR_OPTIMIZER_H_
#define SGIR_OPTIMIZER_H_

#include <cstdint>
#include <map>
#include <string>

#include "sgir/param_store.h"
#include "sgir/tensor.h"

namespace sgir {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;
};

// One bias-corrected Adam update of every parameter that received a gradient
// since the last ZeroGrad(); parameters without one keep value and moments.
// Throws MissingGradient when no parameter has a gradient.
void AdamStep(ParamStore& store, AdamState& state);

}  // namespace sgir

#endif  // SGIR_OPTIMIZER_H_
