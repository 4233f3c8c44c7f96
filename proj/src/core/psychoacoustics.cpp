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

#include "core/psychoacoustics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "core/errors.hpp"
#include "core/fft.hpp"

namespace psyhide {

namespace {

constexpr double kTonalProminenceDb = 7.0;
constexpr double kPowerFloor = 1e-30;

double to_db(double power) { return 10.0 * std::log10(power + kPowerFloor); }

}  // namespace

double hz_to_bark(double f_hz) {
  if (f_hz < 0.0) {
    throw ArgumentError("frequency must be non-negative");
  }
  return 13.0 * std::atan(0.00076 * f_hz) +
         3.5 * std::atan((f_hz / 7500.0) * (f_hz / 7500.0));
}

double threshold_in_quiet(double f_hz) {
  const double f = std::max(f_hz, 20.0);
  const double khz = f / 1000.0;
  const double tq = 3.64 * std::pow(khz, -0.8) -
                    6.5 * std::exp(-0.6 * (khz - 3.3) * (khz - 3.3)) +
                    1e-3 * khz * khz * khz * khz;
  return std::min(tq, 70.0);
}

std::vector<double> granule_threshold_curve(
    const std::vector<TonalMasker>& maskers, int sample_rate_hz) {
  const std::size_t half = kGranuleSize / 2;
  std::vector<double> curve(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    const double f = static_cast<double>(k) * sample_rate_hz /
                     static_cast<double>(kGranuleSize);
    const double z = hz_to_bark(f);
    double masked_power = 0.0;
    for (const TonalMasker& m : maskers) {
      const double dz = z - m.bark;
      // Triangular spreading: steep toward lower frequencies, shallow
      // toward higher ones, with the tonal offset 14.5 + z(masker).
      const double spread = dz <= 0.0 ? 27.0 * dz : -10.0 * dz;
      const double level = m.level_db - (14.5 + m.bark) + spread;
      masked_power += std::pow(10.0, level / 10.0);
    }
    const double masked_db = 10.0 * std::log10(masked_power + kPowerFloor);
    curve[k] = std::max(threshold_in_quiet(f), masked_db);
  }
  return curve;
}

ThresholdMatrix compute_thresholds(const AudioSignal& original,
                                   const FrameConfig& cfg,
                                   std::vector<GranuleAnalysis>* analysis_out) {
  cfg.validate();
  const std::size_t len = original.samples.size();
  if (len < kBufferSize) {
    throw DimensionError("signal shorter than one analysis buffer (" +
                         std::to_string(len) + " < " +
                         std::to_string(kBufferSize) + " samples)");
  }
  const std::size_t frames = cfg.frame_count(len);
  const std::size_t half = kGranuleSize / 2;
  const std::size_t granule_count = (len + kGranuleHop - 1) / kGranuleHop;

  // Granule power spectra.
  const Dft dft(kGranuleSize);
  std::vector<std::vector<double>> power(granule_count);
  std::vector<std::complex<double>> buf(kGranuleSize);
  double max_power = 0.0;
  for (std::size_t g = 0; g < granule_count; ++g) {
    const std::size_t offset = g * kGranuleHop;
    for (std::size_t i = 0; i < kGranuleSize; ++i) {
      const std::size_t idx = offset + i;
      buf[i] = {idx < len ? original.samples[idx] : 0.0, 0.0};
    }
    dft.forward(buf.data());
    power[g].resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
      power[g][k] = std::norm(buf[k]);
      max_power = std::max(max_power, power[g][k]);
    }
  }

  const bool silent = max_power <= 0.0;
  const double max_db = silent ? 0.0 : to_db(max_power);
  // Normalized level: (dB - max_db) + reference puts the loudest bin at
  // exactly the reference value.
  auto normalized_db = [max_db](double p) {
    return (to_db(p) - max_db) + kSplReferenceDb;
  };

  std::vector<GranuleAnalysis> analyses(granule_count);
  std::vector<std::vector<double>> curves(granule_count);
  const double lin_norm =
      silent ? 1.0 : std::pow(10.0, (kSplReferenceDb - max_db) / 10.0);
  for (std::size_t g = 0; g < granule_count; ++g) {
    GranuleAnalysis& ga = analyses[g];
    ga.offset = g * kGranuleHop;
    ga.band_energy.assign(kBandCount, 0.0);
    ga.spectrum_db.resize(half + 1);
    const std::size_t per_band = half / kBandCount;  // 288 / 32 = 9
    for (std::size_t k = 0; k <= half; ++k) {
      const std::size_t band = std::min(k / per_band, kBandCount - 1);
      ga.band_energy[band] += power[g][k] * lin_norm;
      ga.spectrum_db[k] = silent ? to_db(power[g][k]) : normalized_db(power[g][k]);
    }

    if (!silent) {
      // Local peaks at least 7 dB above the bins two to the side.
      for (std::size_t k = 3; k + 3 <= half; ++k) {
        const double pk = ga.spectrum_db[k];
        if (pk > ga.spectrum_db[k - 1] && pk >= ga.spectrum_db[k + 1] &&
            pk - ga.spectrum_db[k - 2] >= kTonalProminenceDb &&
            pk - ga.spectrum_db[k + 2] >= kTonalProminenceDb) {
          TonalMasker m;
          m.bin = k;
          m.freq_hz = static_cast<double>(k) * original.sample_rate_hz /
                      static_cast<double>(kGranuleSize);
          m.bark = hz_to_bark(m.freq_hz);
          // Tone energy leaks into the adjacent bins; fold them in.
          const double tone_power =
              power[g][k - 1] + power[g][k] + power[g][k + 1];
          m.level_db = std::min(normalized_db(tone_power), kSplReferenceDb);
          ga.maskers.push_back(m);
        }
      }
    }
    ga.threshold_db =
        granule_threshold_curve(ga.maskers, original.sample_rate_hz);
    curves[g] = ga.threshold_db;
  }

  // Project onto the attack grid: nearest granule in time, linear
  // interpolation across frequency.
  ThresholdMatrix out;
  out.h_db = Matrix(frames, cfg.dft_size);
  const double granule_center_0 = static_cast<double>(half);
  for (std::size_t t = 0; t < frames; ++t) {
    const double frame_center =
        static_cast<double>(t * cfg.hop) + static_cast<double>(cfg.frame_len) / 2.0;
    std::ptrdiff_t g = static_cast<std::ptrdiff_t>(std::llround(
        (frame_center - granule_center_0) / static_cast<double>(kGranuleHop)));
    g = std::clamp<std::ptrdiff_t>(g, 0,
                                   static_cast<std::ptrdiff_t>(granule_count) - 1);
    const std::vector<double>& curve = curves[static_cast<std::size_t>(g)];

    for (std::size_t k = 0; k < cfg.dft_size; ++k) {
      const std::size_t folded = std::min(k, cfg.dft_size - k);
      const double f = static_cast<double>(folded) * original.sample_rate_hz /
                       static_cast<double>(cfg.dft_size);
      const double pos = f * static_cast<double>(kGranuleSize) /
                         original.sample_rate_hz;
      const std::size_t lo =
          std::min(static_cast<std::size_t>(pos), half - 1);
      const double frac = pos - static_cast<double>(lo);
      out.h_db.at(t, k) = curve[lo] * (1.0 - frac) + curve[lo + 1] * frac;
    }
  }

  if (analysis_out != nullptr) {
    *analysis_out = std::move(analyses);
  }
  return out;
}

}  // namespace psyhide
