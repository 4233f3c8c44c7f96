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

#ifndef PSYHIDE_CORE_METRICS_HPP_
#define PSYHIDE_CORE_METRICS_HPP_

#include <string>
#include <vector>

#include "core/audio_io.hpp"
#include "core/matrix.hpp"

namespace psyhide {

struct WerBreakdown {
  int deletions = 0;
  int insertions = 0;
  int substitutions = 0;
  int reference_length = 0;
  double wer = 0.0;  // (D + I + S) / N, may exceed 1
};

// Minimum-edit alignment with unit costs.  Among minimal alignments the
// backtrack prefers substitutions over insert+delete pairs, so the counts
// are deterministic.
WerBreakdown wer(const std::vector<std::string>& reference,
                 const std::vector<std::string>& hypothesis);

// Mean of the positive entries over the full matrix size; the matrix is
// expected to hold the per-bin dB excess of the perturbation over the
// hearing thresholds.
double phi(const Matrix& excess_db);

// 10 log10(P_signal / P_noise) with noise = modified - original.  Returns
// +infinity when the signals are identical.
double snr_db(const AudioSignal& original, const AudioSignal& modified);

}  // namespace psyhide

#endif  // PSYHIDE_CORE_METRICS_HPP_
