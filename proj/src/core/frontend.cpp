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

#include "core/frontend.hpp"

#include <cmath>
#include <complex>

#include "core/errors.hpp"
#include "core/fft.hpp"

namespace psyhide {

FrameConfig FrameConfig::defaults() {
  FrameConfig cfg;
  cfg.window = hann_window(cfg.frame_len);
  return cfg;
}

std::vector<double> FrameConfig::hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

std::vector<double> FrameConfig::rectangular_window(std::size_t n) {
  return std::vector<double>(n, 1.0);
}

void FrameConfig::validate() const {
  if (hop == 0 || hop > frame_len || frame_len > dft_size) {
    throw ArgumentError("frame config must satisfy 0 < hop <= N <= dft_size");
  }
  if (window.size() != frame_len) {
    throw ArgumentError("window length does not match frame length");
  }
  for (double w : window) {
    if (!(w >= 0.0 && w <= 1.0)) {
      throw ArgumentError("window coefficients must lie in [0, 1]");
    }
  }
}

std::size_t FrameConfig::frame_count(std::size_t signal_len) const {
  if (signal_len < frame_len) {
    throw DimensionError("signal shorter than one analysis frame (" +
                         std::to_string(signal_len) + " < " +
                         std::to_string(frame_len) + " samples)");
  }
  // Tail samples that do not fill a frame are dropped.
  return 1 + (signal_len - frame_len) / hop;
}

double SpectroGrid::magnitude(std::size_t t, std::size_t k) const {
  return std::hypot(re.at(t, k), im.at(t, k));
}

double SpectroGrid::max_magnitude() const {
  double best = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < bins(); ++k) {
      const double m = re.at(t, k) * re.at(t, k) + im.at(t, k) * im.at(t, k);
      if (m > best) best = m;
    }
  }
  return std::sqrt(best);
}

PreprocessResult forward_preprocess(const AudioSignal& x,
                                    const FrameConfig& cfg) {
  cfg.validate();
  const std::size_t frames = cfg.frame_count(x.samples.size());
  const std::size_t n = cfg.frame_len;
  const std::size_t nd = cfg.dft_size;

  PreprocessResult out;
  out.grid.config = cfg;
  out.grid.frames = frames;
  out.grid.signal_len = x.samples.size();
  out.grid.windowed = Matrix(frames, n);
  out.grid.re = Matrix(frames, nd);
  out.grid.im = Matrix(frames, nd);
  out.grid.power = Matrix(frames, nd);
  out.features = Matrix(frames, nd);

  const Dft dft(nd);
  std::vector<std::complex<double>> buf(nd);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = x.samples.data() + t * cfg.hop;
    double* xw = out.grid.windowed.row(t);
    for (std::size_t i = 0; i < n; ++i) {
      xw[i] = src[i] * cfg.window[i];
      buf[i] = {xw[i], 0.0};
    }
    for (std::size_t i = n; i < nd; ++i) buf[i] = {0.0, 0.0};
    dft.forward(buf.data());

    double* re = out.grid.re.row(t);
    double* im = out.grid.im.row(t);
    double* pw = out.grid.power.row(t);
    double* ft = out.features.row(t);
    for (std::size_t k = 0; k < nd; ++k) {
      re[k] = buf[k].real();
      im[k] = buf[k].imag();
      pw[k] = re[k] * re[k] + im[k] * im[k];
      ft[k] = std::log(pw[k] + kLogEpsilon);
    }
  }
  return out;
}

std::vector<double> backward_preprocess(const Matrix& grad_features,
                                        const SpectroGrid& grid,
                                        const Matrix* spectral_scale) {
  if (grad_features.rows() != grid.frames ||
      grad_features.cols() != grid.bins()) {
    throw DimensionError("feature cotangent does not match grid");
  }
  if (spectral_scale != nullptr) {
    grad_features.require_same_shape(*spectral_scale, "spectral scale");
  }

  const FrameConfig& cfg = grid.config;
  const std::size_t n = cfg.frame_len;
  const std::size_t nd = cfg.dft_size;

  // Dropped tail samples never entered a frame, so their gradient is zero.
  std::vector<double> grad_x(grid.signal_len, 0.0);
  const Dft dft(nd);
  std::vector<std::complex<double>> buf(nd);

  for (std::size_t t = 0; t < grid.frames; ++t) {
    const double* g = grad_features.row(t);
    const double* re = grid.re.row(t);
    const double* im = grid.im.row(t);
    const double* pw = grid.power.row(t);
    for (std::size_t k = 0; k < nd; ++k) {
      // log stage, then the separate (Re, Im) magnitude derivatives.
      const double g_power = g[k] / (pw[k] + kLogEpsilon);
      double g_re = g_power * 2.0 * re[k];
      double g_im = g_power * 2.0 * im[k];
      if (spectral_scale != nullptr) {
        const double s = spectral_scale->at(t, k);
        g_re *= s;
        g_im *= s;
      }
      buf[k] = {g_re, g_im};
    }
    // DFT adjoint: grad_xw(n) = Re( sum_k (gRe + i gIm) exp(+i 2 pi k n / N) ).
    dft.inverse(buf.data());
    const double* w = cfg.window.data();
    double* dst = grad_x.data() + t * cfg.hop;
    for (std::size_t i = 0; i < n; ++i) {
      dst[i] += w[i] * buf[i].real();
    }
  }
  return grad_x;
}

}  // namespace psyhide
