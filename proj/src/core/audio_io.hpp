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

#ifndef PSYHIDE_CORE_AUDIO_IO_HPP_
#define PSYHIDE_CORE_AUDIO_IO_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace psyhide {

inline constexpr int kCanonicalSampleRate = 16000;

// Mono PCM signal, samples scaled to [-1, 1].  This is the variable the
// attack optimizes, so everything downstream works on doubles.
struct AudioSignal {
  std::vector<double> samples;
  int sample_rate_hz = kCanonicalSampleRate;

  std::size_t length() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

// Reads a RIFF/WAVE file.  Accepts 16-bit PCM, mono or stereo (stereo is
// downmixed by averaging), and only the canonical 16 kHz rate; anything
// else is rejected rather than resampled.
AudioSignal read_wav(const std::string& path);

// Writes mono 16-bit PCM.  Samples outside [-1, 1] are hard-clipped; the
// return value counts how many were.
std::size_t write_wav(const AudioSignal& signal, const std::string& path);

}  // namespace psyhide

#endif  // PSYHIDE_CORE_AUDIO_IO_HPP_
