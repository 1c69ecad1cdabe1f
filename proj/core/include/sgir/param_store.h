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

#ifndef SGIR_PARAM_STORE_H_
#define SGIR_PARAM_STORE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sgir/tensor.h"

namespace sgir {

enum class ParamInit {
  // U(-a, a) with a = sqrt(6 / (fan_in + fan_out)); fans from the matrix view.
  kGlorotUniform,
  kZeros,
};

// Named parameters with matching gradient buffers. Iteration order is the
// lexicographic name order, which keeps serialization and optimizer updates
// deterministic. Each parameter is initialized from its own generator seeded
// by (store seed, name), so creation order does not affect values.
class ParamStore {
 public:
  struct Entry {
    Tensor value;
    Tensor grad;
    // Set when a backward pass wrote into `grad` since the last ZeroGrad().
    bool has_grad = false;
  };

  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  // Returns the existing parameter (shape must match) or creates it.
  Tensor& GetOrCreate(const std::string& name,
                      const std::vector<std::int64_t>& shape, ParamInit init);
  // Inserts or replaces a parameter value; gradient reset to zero.
  void Set(const std::string& name, Tensor value);

  bool Contains(const std::string& name) const;
  const Tensor& Value(const std::string& name) const;
  Tensor& MutableValue(const std::string& name);
  const Tensor& Grad(const std::string& name) const;
  Entry& MutableEntry(const std::string& name);

  void ZeroGrad();
  bool AnyGradient() const;

  std::vector<std::string> Names() const;
  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::map<std::string, Entry>& mutable_entries() { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::int64_t NumScalars() const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::map<std::string, Entry> entries_;
};

}  // namespace sgir

#endif  // SGIR_PARAM_STORE_H_
