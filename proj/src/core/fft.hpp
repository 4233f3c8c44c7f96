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

#ifndef PSYHIDE_CORE_FFT_HPP_
#define PSYHIDE_CORE_FFT_HPP_

#include <complex>
#include <cstddef>
#include <vector>

namespace psyhide {

// Unnormalized DFT, X(k) = sum_n x(n) exp(-i 2 pi k n / N).
//
// Power-of-two sizes run through an iterative radix-2 transform; any other
// size falls back to a table-driven direct sum so callers are free to pick
// odd analysis lengths (the psychoacoustic granules are 576 samples).
class Dft {
 public:
  explicit Dft(std::size_t size);

  std::size_t size() const { return size_; }

  // In-place forward transform; buf.size() must equal size().
  void forward(std::complex<double>* buf) const;

  // In-place unnormalized inverse, y(n) = sum_k z(k) exp(+i 2 pi k n / N).
  void inverse(std::complex<double>* buf) const;

 private:
  void radix2(std::complex<double>* buf) const;
  void direct(std::complex<double>* buf, bool inverse) const;

  std::size_t size_ = 0;
  bool pow2_ = false;
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;  // exp(-i 2 pi m / N), m < N
};

}  // namespace psyhide

#endif  // PSYHIDE_CORE_FFT_HPP_
