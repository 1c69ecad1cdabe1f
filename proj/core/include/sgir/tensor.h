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

#ifndef SGIR_TENSOR_H_
#define SGIR_TENSOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sgir {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

// Dense row-major float64 array. Rank-2 tensors double as matrices; a tensor
// of any rank can be viewed as a matrix of shape [dim0, product(rest)].
class Tensor {
 public:
  Tensor() = default;
  // Zero-filled.
  explicit Tensor(std::vector<std::int64_t> shape);
  Tensor(std::vector<std::int64_t> shape, std::vector<double> data);

  static Tensor Matrix(std::int64_t rows, std::int64_t cols) {
    return Tensor({rows, cols});
  }
  static Tensor Matrix(std::int64_t rows, std::int64_t cols,
                       std::vector<double> data) {
    return Tensor({rows, cols}, std::move(data));
  }
  static Tensor Scalar(double value) { return Tensor({1, 1}, {value}); }

  const std::vector<std::int64_t>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  std::int64_t rows() const;
  std::int64_t cols() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* raw() { return data_.data(); }
  const double* raw() const { return data_.data(); }

  double& operator[](std::int64_t i) { return data_[i]; }
  double operator[](std::int64_t i) const { return data_[i]; }
  double& at(std::int64_t r, std::int64_t c) { return data_[r * cols() + c]; }
  double at(std::int64_t r, std::int64_t c) const {
    return data_[r * cols() + c];
  }
  double scalar() const;

  MatrixMap matrix() { return MatrixMap(data_.data(), rows(), cols()); }
  ConstMatrixMap matrix() const {
    return ConstMatrixMap(data_.data(), rows(), cols());
  }

  // Same data under a new shape; throws ShapeMismatch if sizes differ.
  Tensor Reshaped(std::vector<std::int64_t> shape) const;
  bool AllFinite() const;
  void SetZero();
  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::int64_t> shape_;
  std::vector<double> data_;
};

std::string ShapeString(const std::vector<std::int64_t>& shape);

}  // namespace sgir

#endif  // SGIR_TENSOR_H_
