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

#ifndef PSYHIDE_CORE_FRONTEND_HPP_
#define PSYHIDE_CORE_FRONTEND_HPP_

#include <cstddef>
#include <vector>

#include "core/audio_io.hpp"
#include "core/matrix.hpp"

namespace psyhide {

// Feature floor inside the logarithm; keeps log |X|^2 finite on silent bins
// and floors features at about -23.
inline constexpr double kLogEpsilon = 1e-10;

// Analysis geometry.  Defaults are 25 ms frames, 10 ms hop, zero-padded
// 512-point DFT at 16 kHz.
struct FrameConfig {
  std::size_t frame_len = 400;
  std::size_t hop = 160;
  std::size_t dft_size = 512;
  std::vector<double> window;  // frame_len coefficients in [0, 1]

  static FrameConfig defaults();
  static std::vector<double> hann_window(std::size_t n);          // periodic
  static std::vector<double> rectangular_window(std::size_t n);

  void validate() const;
  std::size_t bins() const { return dft_size; }
  std::size_t frame_count(std::size_t signal_len) const;
};

// Per-frame complex spectra plus every intermediate the backward pass
// needs: windowed frames, separate real/imaginary parts, squared
// magnitudes.
struct SpectroGrid {
  FrameConfig config;
  std::size_t frames = 0;
  std::size_t signal_len = 0;  // length of the analyzed signal
  Matrix windowed;   // frames x frame_len
  Matrix re;         // frames x dft_size
  Matrix im;         // frames x dft_size
  Matrix power;      // frames x dft_size, re^2 + im^2

  std::size_t bins() const { return config.dft_size; }
  double magnitude(std::size_t t, std::size_t k) const;
  double max_magnitude() const;
};

// features(t, k) = log(|X(t,k)|^2 + kLogEpsilon)
struct PreprocessResult {
  Matrix features;
  SpectroGrid grid;
};

// Forward chain: framing + window, DFT, squared magnitude, log.
PreprocessResult forward_preprocess(const AudioSignal& x,
                                    const FrameConfig& cfg);

// Pulls a feature-space cotangent back to per-sample gradients, stage by
// stage: 1/(|X|^2 + eps), the (2 Re, 2 Im) magnitude pair, the DFT adjoint,
// the window, and overlap summation across frames.
//
// When spectral_scale is non-null it multiplies both members of the
// (Re, Im) gradient pair between the magnitude and DFT stages; the attack
// uses this for its masking scale factors.  Zero scale entries yield
// exactly zero contribution.
std::vector<double> backward_preprocess(const Matrix& grad_features,
                                        const SpectroGrid& grid,
                                        const Matrix* spectral_scale = nullptr);

}  // namespace psyhide

#endif  // PSYHIDE_CORE_FRONTEND_HPP_
