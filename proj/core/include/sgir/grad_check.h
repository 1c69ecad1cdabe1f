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

#ifndef SGIR_GRAD_CHECK_H_
#define SGIR_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>

#include "sgir/autodiff.h"
#include "sgir/param_store.h"

namespace sgir {

struct GradCheckOptions {
  double epsilon = 1e-4;
  int max_coordinates = 200;
  std::uint64_t seed = 0;
  // Relative errors use max(|analytic|, |numeric|, floor) as denominator.
  double denominator_floor = 1e-6;
  // Skip coordinates whose +-epsilon probes flip any LeakyRelu input sign;
  // central differences across a kink measure a blend of two slopes.
  bool skip_kink_crossings = true;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::int64_t worst_index = -1;
  int checked = 0;
  int skipped_kinks = 0;
};

// Builds the forward pass of a scalar loss on the given tape, reading
// parameters from the store being checked.
using LossClosure = std::function<Var(Tape&)>;

// Compares analytic gradients with central finite differences on up to
// `max_coordinates` coordinates, visiting parameters round-robin and sampling
// indices within each parameter without replacement.
// Parameter values are restored afterwards; gradients are left populated
// with the analytic result.
GradCheckResult GradCheck(const LossClosure& loss, ParamStore& store,
                          const GradCheckOptions& options = {});

}  // namespace sgir

#endif  // SGIR_GRAD_CHECK_H_
