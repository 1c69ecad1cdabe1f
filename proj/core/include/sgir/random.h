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

#ifndef SGIR_RANDOM_H_
#define SGIR_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace sgir {

std::uint64_t Fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 14695981039346656037ULL);

// Seeded generator with platform-independent draws. std::mt19937_64 has a
// fully specified output sequence; the std distributions do not, so the
// conversions to floating point and bounded integers are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1).
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n). `n` must be positive.
  std::uint64_t UniformInt(std::uint64_t n);
  // Standard normal via Box-Muller.
  double Normal();

  template <typename It>
  void Shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = UniformInt(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sgir

#endif  // SGIR_RANDOM_H_
