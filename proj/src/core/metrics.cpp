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

#include "core/metrics.hpp"

#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace psyhide {

WerBreakdown wer(const std::vector<std::string>& reference,
                 const std::vector<std::string>& hypothesis) {
  const std::size_t m = reference.size();
  const std::size_t n = hypothesis.size();
  if (m == 0) {
    throw ArgumentError("reference word sequence is empty");
  }

  // Distance matrix over prefixes, flat row-major.
  std::vector<int> dist((m + 1) * (n + 1));
  const std::size_t stride = n + 1;
  auto d = [&dist, stride](std::size_t i, std::size_t j) -> int& {
    return dist[i * stride + j];
  };
  for (std::size_t i = 0; i <= m; ++i) d(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= n; ++j) d(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      if (reference[i - 1] == hypothesis[j - 1]) {
        d(i, j) = d(i - 1, j - 1);
      } else {
        d(i, j) = 1 + std::min({d(i - 1, j - 1), d(i - 1, j), d(i, j - 1)});
      }
    }
  }

  WerBreakdown out;
  out.reference_length = static_cast<int>(m);

  // Backtrack; matches first, then substitution, deletion, insertion.
  std::size_t i = m;
  std::size_t j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && reference[i - 1] == hypothesis[j - 1] &&
        d(i, j) == d(i - 1, j - 1)) {
      --i;
      --j;
    } else if (i > 0 && j > 0 && d(i, j) == d(i - 1, j - 1) + 1) {
      ++out.substitutions;
      --i;
      --j;
    } else if (i > 0 && d(i, j) == d(i - 1, j) + 1) {
      ++out.deletions;
      --i;
    } else {
      ++out.insertions;
      --j;
    }
  }

  out.wer = static_cast<double>(out.deletions + out.insertions +
                                out.substitutions) /
            static_cast<double>(m);
  return out;
}

double phi(const Matrix& excess_db) {
  if (excess_db.size() == 0) {
    throw ArgumentError("phi of an empty matrix");
  }
  double total = 0.0;
  for (std::size_t r = 0; r < excess_db.rows(); ++r) {
    const double* row = excess_db.row(r);
    for (std::size_t c = 0; c < excess_db.cols(); ++c) {
      if (std::isnan(row[c])) {
        throw NumericError("phi input contains NaN");
      }
      if (row[c] > 0.0) total += row[c];
    }
  }
  return total / static_cast<double>(excess_db.size());
}

double snr_db(const AudioSignal& original, const AudioSignal& modified) {
  if (original.samples.size() != modified.samples.size()) {
    throw DimensionError("SNR inputs differ in length");
  }
  double p_signal = 0.0;
  double p_noise = 0.0;
  for (std::size_t i = 0; i < original.samples.size(); ++i) {
    const double s = original.samples[i];
    const double d = modified.samples[i] - s;
    p_signal += s * s;
    p_noise += d * d;
  }
  if (p_signal == 0.0) {
    throw ArgumentError("SNR undefined for an all-zero original");
  }
  if (p_noise == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(p_signal / p_noise);
}

}  // namespace psyhide
