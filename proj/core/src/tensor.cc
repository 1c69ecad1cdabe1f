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

#include "sgir/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "sgir/error.h"

namespace sgir {
namespace {

std::int64_t Product(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (const std::int64_t d : shape) {
    if (d < 0) throw Error(ErrorCode::kShapeMismatch, "negative dimension");
    n *= d;
  }
  return n;
}

}  // namespace

std::string ShapeString(const std::vector<std::int64_t>& shape) {
  return fmt::format("[{}]", fmt::join(shape, ", "));
}

Tensor::Tensor(std::vector<std::int64_t> shape)
    : shape_(std::move(shape)), data_(Product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::int64_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (Product(shape_) != static_cast<std::int64_t>(data_.size())) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("shape {} does not hold {} values",
                            ShapeString(shape_), data_.size()));
  }
}

std::int64_t Tensor::rows() const {
  return shape_.empty() ? 1 : shape_[0];
}

std::int64_t Tensor::cols() const {
  if (shape_.empty()) return 1;
  if (shape_[0] == 0) {
    std::int64_t n = 1;
    for (std::size_t i = 1; i < shape_.size(); ++i) n *= shape_[i];
    return n;
  }
  return size() / shape_[0];
}

double Tensor::scalar() const {
  if (data_.size() != 1) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("expected a scalar, got {}", ShapeString(shape_)));
  }
  return data_[0];
}

Tensor Tensor::Reshaped(std::vector<std::int64_t> shape) const {
  return Tensor(std::move(shape), data_);
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::SetZero() { std::fill(data_.begin(), data_.end(), 0.0); }

}  // namespace sgir
