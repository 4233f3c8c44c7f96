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

#include "core/matrix.hpp"

#include <cstdio>
#include <fstream>

namespace psyhide {

double Matrix::min_value() const {
  double v = data_.empty() ? 0.0 : data_[0];
  for (double x : data_) {
    if (x < v) v = x;
  }
  return v;
}

double Matrix::max_value() const {
  double v = data_.empty() ? 0.0 : data_[0];
  for (double x : data_) {
    if (x > v) v = x;
  }
  return v;
}

void write_csv(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  char buf[64];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.6f", m.at(r, c));
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

}  // namespace psyhide
