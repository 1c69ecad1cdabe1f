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

#include "sgir/optimizer.h"

#include <cmath>

#include "sgir/error.h"

namespace sgir {

void AdamStep(ParamStore& store, AdamState& state) {
  if (!store.AnyGradient()) {
    throw Error(ErrorCode::kMissingGradient,
                "no parameter has a gradient; run backward first");
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (auto& [name, entry] : store.mutable_entries()) {
    if (!entry.has_grad) continue;
    auto [m_it, m_new] = state.first_moment.try_emplace(name, entry.value.shape());
    auto [v_it, v_new] = state.second_moment.try_emplace(name, entry.value.shape());
    Tensor& m = m_it->second;
    Tensor& v = v_it->second;
    if (!m.SameShape(entry.value) || !v.SameShape(entry.value)) {
      throw Error(ErrorCode::kShapeMismatch, "optimizer moments out of shape");
    }
    double* p = entry.value.raw();
    const double* g = entry.grad.raw();
    double* mp = m.raw();
    double* vp = v.raw();
    for (std::int64_t i = 0; i < entry.value.size(); ++i) {
      mp[i] = c.beta1 * mp[i] + (1.0 - c.beta1) * g[i];
      vp[i] = c.beta2 * vp[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double m_hat = mp[i] / correction1;
      const double v_hat = vp[i] / correction2;
      p[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace sgir
