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

#include "core/fft.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace psyhide {

namespace {
bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }
}  // namespace

Dft::Dft(std::size_t size) : size_(size), pow2_(is_pow2(size)) {
  if (size_ == 0) {
    throw ArgumentError("DFT size must be positive");
  }
  twiddle_.resize(size_);
  for (std::size_t m = 0; m < size_; ++m) {
    const double ang = -2.0 * M_PI * static_cast<double>(m) /
                       static_cast<double>(size_);
    twiddle_[m] = {std::cos(ang), std::sin(ang)};
  }
  if (pow2_) {
    bitrev_.resize(size_);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < size_) ++log2n;
    for (std::size_t i = 0; i < size_; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < log2n; ++b) {
        r |= ((i >> b) & 1u) << (log2n - 1 - b);
      }
      bitrev_[i] = r;
    }
  }
}

void Dft::radix2(std::complex<double>* buf) const {
  for (std::size_t i = 0; i < size_; ++i) {
    const std::size_t j = bitrev_[i];
    if (j > i) std::swap(buf[i], buf[j]);
  }
  for (std::size_t len = 2; len <= size_; len <<= 1) {
    const std::size_t stride = size_ / len;
    const std::size_t half = len / 2;
    for (std::size_t start = 0; start < size_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> w = twiddle_[k * stride];
        const std::complex<double> u = buf[start + k];
        const std::complex<double> v = buf[start + k + half] * w;
        buf[start + k] = u + v;
        buf[start + k + half] = u - v;
      }
    }
  }
}

void Dft::direct(std::complex<double>* buf, bool inverse) const {
  std::vector<std::complex<double>> out(size_, {0.0, 0.0});
  for (std::size_t k = 0; k < size_; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t n = 0; n < size_; ++n) {
      std::size_t m = (k * n) % size_;
      std::complex<double> w = twiddle_[m];
      if (inverse) w = std::conj(w);
      acc += buf[n] * w;
    }
    out[k] = acc;
  }
  for (std::size_t k = 0; k < size_; ++k) buf[k] = out[k];
}

void Dft::forward(std::complex<double>* buf) const {
  if (pow2_) {
    radix2(buf);
  } else {
    direct(buf, false);
  }
}

void Dft::inverse(std::complex<double>* buf) const {
  if (pow2_) {
    // conj(FFT(conj(z))) = sum_k z(k) exp(+i 2 pi k n / N)
    for (std::size_t i = 0; i < size_; ++i) buf[i] = std::conj(buf[i]);
    radix2(buf);
    for (std::size_t i = 0; i < size_; ++i) buf[i] = std::conj(buf[i]);
  } else {
    direct(buf, true);
  }
}

}  // namespace psyhide
