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

#include "sgir/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "sgir/random.h"

namespace sgir {
namespace {

struct Probe {
  double loss;
  std::vector<std::uint8_t> pattern;
};

Probe Evaluate(const LossClosure& loss) {
  Tape tape;
  const double value = loss(tape).value().scalar();
  return Probe{value, tape.activation_pattern()};
}

}  // namespace

GradCheckResult GradCheck(const LossClosure& loss, ParamStore& store,
                          const GradCheckOptions& options) {
  store.ZeroGrad();
  std::vector<std::uint8_t> base_pattern;
  {
    Tape tape;
    Var l = loss(tape);
    base_pattern = tape.activation_pattern();
    tape.Backward(l);
  }

  // Round-robin over parameters so small tensors are covered too; indices
  // within a parameter are sampled without replacement.
  struct Stream {
    std::string name;
    std::vector<std::int64_t> indices;
  };
  std::vector<Stream> streams;
  Rng rng(options.seed);
  const std::size_t per_param = static_cast<std::size_t>(
      std::max(options.max_coordinates, 0));
  for (const auto& [name, entry] : store.entries()) {
    const auto size = static_cast<std::size_t>(entry.value.size());
    const std::size_t take = std::min(size, per_param);
    std::vector<std::int64_t> picked;
    if (size <= 4 * take) {
      picked.resize(size);
      std::iota(picked.begin(), picked.end(), std::int64_t{0});
      rng.Shuffle(picked.begin(), picked.end());
      picked.resize(take);
    } else {
      std::set<std::int64_t> seen;
      while (picked.size() < take) {
        const auto i = static_cast<std::int64_t>(rng.UniformInt(size));
        if (seen.insert(i).second) picked.push_back(i);
      }
    }
    streams.push_back({name, std::move(picked)});
  }
  struct Coordinate {
    std::string name;
    std::int64_t index;
  };
  std::vector<Coordinate> all;
  for (std::size_t round = 0; round < per_param; ++round) {
    for (const Stream& s : streams) {
      if (round < s.indices.size()) all.push_back({s.name, s.indices[round]});
    }
  }

  GradCheckResult result;
  for (const Coordinate& coord : all) {
    if (result.checked >= options.max_coordinates) break;
    ParamStore::Entry& entry = store.MutableEntry(coord.name);
    const double original = entry.value[coord.index];
    entry.value[coord.index] = original + options.epsilon;
    const Probe plus = Evaluate(loss);
    entry.value[coord.index] = original - options.epsilon;
    const Probe minus = Evaluate(loss);
    entry.value[coord.index] = original;

    if (options.skip_kink_crossings &&
        (plus.pattern != base_pattern || minus.pattern != base_pattern)) {
      ++result.skipped_kinks;
      continue;
    }
    const double numeric = (plus.loss - minus.loss) / (2.0 * options.epsilon);
    const double analytic = entry.grad[coord.index];
    const double denom = std::max({std::abs(analytic), std::abs(numeric),
                                   options.denominator_floor});
    const double rel = std::abs(analytic - numeric) / denom;
    if (result.worst_index < 0 || rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_parameter = coord.name;
      result.worst_index = coord.index;
    }
    ++result.checked;
  }
  return result;
}

}  // namespace sgir
