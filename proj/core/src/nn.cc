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

#include "sgir/nn.h"

#include <fmt/format.h>

#include "sgir/error.h"

namespace sgir {
namespace {

std::string WeightName(const std::string& prefix, std::size_t layer) {
  return fmt::format("{}.layer{}.weight", prefix, layer);
}

std::string BiasName(const std::string& prefix, std::size_t layer) {
  return fmt::format("{}.layer{}.bias", prefix, layer);
}

}  // namespace

void InitMlp(ParamStore& store, const std::string& prefix,
             const std::vector<std::int64_t>& dims) {
  if (dims.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "an MLP needs at least two dims");
  }
  for (std::size_t j = 0; j + 1 < dims.size(); ++j) {
    store.GetOrCreate(WeightName(prefix, j), {dims[j], dims[j + 1]},
                      ParamInit::kGlorotUniform);
    store.GetOrCreate(BiasName(prefix, j), {1, dims[j + 1]}, ParamInit::kZeros);
  }
}

Var MlpApply(Tape& tape, ParamStore& store, const std::string& prefix,
             Var input, const std::vector<std::int64_t>& dims,
             double leaky_slope) {
  if (dims.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "an MLP needs at least two dims");
  }
  if (input.cols() != dims.front()) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("{}: input width {} but dims start at {}", prefix,
                            input.cols(), dims.front()));
  }
  InitMlp(store, prefix, dims);
  Var h = input;
  for (std::size_t j = 0; j + 1 < dims.size(); ++j) {
    h = Linear(h, tape.Parameter(store, WeightName(prefix, j)),
               tape.Parameter(store, BiasName(prefix, j)));
    if (j + 2 < dims.size()) h = LeakyRelu(h, leaky_slope);
  }
  return h;
}

}  // namespace sgir
