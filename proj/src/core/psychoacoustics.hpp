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

#ifndef PSYHIDE_CORE_PSYCHOACOUSTICS_HPP_
#define PSYHIDE_CORE_PSYCHOACOUSTICS_HPP_

#include <cstddef>
#include <vector>

#include "core/audio_io.hpp"
#include "core/frontend.hpp"
#include "core/matrix.hpp"

namespace psyhide {

// All spectra are normalized so the loudest time-frequency bin of the
// utterance sits at exactly this level.
inline constexpr double kSplReferenceDb = 95.0;

// MP3-style analysis geometry: 1024-sample buffers advancing by 512 hold
// two 576-sample granules, i.e. granules start every 512 samples and reach
// 64 samples into the following buffer (zero-padded at the signal tail).
inline constexpr std::size_t kGranuleSize = 576;
inline constexpr std::size_t kGranuleHop = 512;
inline constexpr std::size_t kBufferSize = 1024;
inline constexpr std::size_t kBandCount = 32;

// z = 13 atan(0.00076 f) + 3.5 atan((f / 7500)^2); strictly increasing.
double hz_to_bark(double f_hz);

// Terhardt-style approximation of the hearing threshold in quiet, in dB on
// the normalized scale.  Frequencies below 20 Hz clamp to the 20 Hz value;
// the result is capped at 70 dB.
double threshold_in_quiet(double f_hz);

struct TonalMasker {
  std::size_t bin = 0;     // granule spectrum bin
  double freq_hz = 0.0;
  double bark = 0.0;
  double level_db = 0.0;   // normalized scale, <= 95 dB
};

struct GranuleAnalysis {
  std::size_t offset = 0;                // first sample of the granule
  std::vector<double> band_energy;       // kBandCount normalized power sums
  std::vector<double> spectrum_db;       // normalized bin levels
  std::vector<TonalMasker> maskers;
  std::vector<double> threshold_db;      // per spectrum bin 0..kGranuleSize/2
};

// Per-bin masking thresholds H on the attack's time-frequency grid.
struct ThresholdMatrix {
  Matrix h_db;                 // frames x dft bins, same shape as SpectroGrid
  double reference_db = kSplReferenceDb;
};

// Hearing thresholds of `original`: granule spectra normalized to the
// 95 dB reference, tonal-masker detection (local peaks at least 7 dB above
// their neighborhood), two-slope spreading on the bark axis (
// +27 dB/bark below, -10 dB/bark above the masker, offset 14.5 + z below
// the masker level), power-summed and floored at the threshold in quiet,
// then projected onto the frame grid of `cfg` by nearest granule in time
// and linear interpolation across frequency bins.
//
// Digital silence carries no maskers, so H reduces to the projected
// threshold-in-quiet curve.
ThresholdMatrix compute_thresholds(const AudioSignal& original,
                                   const FrameConfig& cfg,
                                   std::vector<GranuleAnalysis>* analysis_out =
                                       nullptr);

// Exposed for the masker-combination tests: the global threshold curve of
// one granule spectrum given its detected maskers.
std::vector<double> granule_threshold_curve(
    const std::vector<TonalMasker>& maskers, int sample_rate_hz);

}  // namespace psyhide

#endif  // PSYHIDE_CORE_PSYCHOACOUSTICS_HPP_
