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

#include "sgir/param_store.h"

#include <cmath>

#include <fmt/format.h>

#include "sgir/error.h"
#include "sgir/random.h"

namespace sgir {

Tensor& ParamStore::GetOrCreate(const std::string& name,
                                const std::vector<std::int64_t>& shape,
                                ParamInit init) {
  if (auto it = entries_.find(name); it != entries_.end()) {
    if (it->second.value.shape() != shape) {
      throw Error(ErrorCode::kShapeMismatch,
                  fmt::format("parameter '{}' has shape {}, requested {}", name,
                              ShapeString(it->second.value.shape()),
                              ShapeString(shape)));
    }
    return it->second.value;
  }
  Tensor value(shape);
  if (init == ParamInit::kGlorotUniform) {
    const double fan_in = static_cast<double>(value.rows());
    const double fan_out = static_cast<double>(value.cols());
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Rng rng(seed_ ^ Fnv1a64(name));
    for (double& v : value.data()) v = rng.Uniform(-limit, limit);
  }
  Entry& entry = entries_[name];
  entry.grad = Tensor(shape);
  entry.value = std::move(value);
  return entry.value;
}

void ParamStore::Set(const std::string& name, Tensor value) {
  Entry& entry = entries_[name];
  entry.grad = Tensor(value.shape());
  entry.value = std::move(value);
  entry.has_grad = false;
}

bool ParamStore::Contains(const std::string& name) const {
  return entries_.count(name) != 0;
}

const Tensor& ParamStore::Value(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("unknown parameter '{}'", name));
  }
  return it->second.value;
}

Tensor& ParamStore::MutableValue(const std::string& name) {
  return MutableEntry(name).value;
}

const Tensor& ParamStore::Grad(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("unknown parameter '{}'", name));
  }
  return it->second.grad;
}

ParamStore::Entry& ParamStore::MutableEntry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("unknown parameter '{}'", name));
  }
  return it->second;
}

void ParamStore::ZeroGrad() {
  for (auto& [name, entry] : entries_) {
    entry.grad.SetZero();
    entry.has_grad = false;
  }
}

bool ParamStore::AnyGradient() const {
  for (const auto& [name, entry] : entries_) {
    if (entry.has_grad) return true;
  }
  return false;
}

std::vector<std::string> ParamStore::Names() const {
  std::vector<std::string> names;
  names.reserve(entries_.size());
  for (const auto& [name, entry] : entries_) names.push_back(name);
  return names;
}

std::int64_t ParamStore::NumScalars() const {
  std::int64_t n = 0;
  for (const auto& [name, entry] : entries_) n += entry.value.size();
  return n;
}

}  // namespace sgir
