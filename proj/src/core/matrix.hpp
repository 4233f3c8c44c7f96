// Copyright 2026 The psyhide Authors
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

#ifndef PSYHIDE_CORE_MATRIX_HPP_
#define PSYHIDE_CORE_MATRIX_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace psyhide {

// Dense row-major matrix of doubles.  Frames index rows, frequency bins or
// model states index columns throughout the library.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  void require_same_shape(const Matrix& other, const char* what) const {
    if (!same_shape(other)) {
      throw DimensionError(std::string(what) + ": shape mismatch (" +
                           std::to_string(rows_) + "x" + std::to_string(cols_) +
                           " vs " + std::to_string(other.rows_) + "x" +
                           std::to_string(other.cols_) + ")");
    }
  }

  double min_value() const;
  double max_value() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Writes one row per line, comma separated, fixed six-decimal format.
void write_csv(const Matrix& m, const std::string& path);

}  // namespace psyhide

#endif  // PSYHIDE_CORE_MATRIX_HPP_
