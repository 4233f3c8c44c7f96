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

#ifndef PSYHIDE_CORE_ATTACK_HPP_
#define PSYHIDE_CORE_ATTACK_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "core/acoustic_model.hpp"
#include "core/audio_io.hpp"
#include "core/decoder.hpp"
#include "core/frontend.hpp"
#include "core/matrix.hpp"
#include "core/psychoacoustics.hpp"

namespace psyhide {

// Floor on |S - M| before the logarithm of the difference matrix.
inline constexpr double kDifferenceEpsilon = 1e-12;

struct AttackConfig {
  double lambda_db = 20.0;        // allowed dB excess above the thresholds
  double learning_rate = 0.05;
  int max_iterations = 500;
  int check_every = 100;          // decode cadence
  bool use_thresholds = true;
  bool use_forced_alignment = true;
  std::uint64_t seed = 0;         // echoed into the report; harness-level
  int realign_every = 0;          // 0 keeps the initial alignment
  double phone_rate_limit = 6.0;  // phones per second
  FrameConfig frame = FrameConfig::defaults();
  std::string dump_spectra_dir;   // when set: CSVs of |S|, |M|, |D|, H

  void validate() const;
};

struct AttackReport {
  bool success = false;           // success iff final WER == 0
  int iterations_used = 0;
  double initial_wer = 0.0;
  double final_wer = 0.0;
  double phi_db = 0.0;            // mean positive dB excess over thresholds
  double snr_db = 0.0;
  double phone_rate = 0.0;
  std::string alignment_source;   // "forced" or "equal"
  bool alignment_fallback = false;
  std::string decoded_transcript;
  std::string target_transcript;
  std::vector<double> loss_history;
  AttackConfig config;

  std::string to_json() const;
};

struct AttackResult {
  AudioSignal adversarial;
  AttackReport report;
};

// D(t,k) = 20 log10(max(|S - M|, eps) / max |S|).  Zero difference lands on
// the epsilon floor; the reference is the peak magnitude of the original.
Matrix difference_matrix(const SpectroGrid& original,
                         const SpectroGrid& modified);

// The difference matrix is referenced to the utterance peak (0 dB at the
// peak); the threshold matrix puts that same peak at kSplReferenceDb.
// Shifting D onto the threshold scale makes H - D a like-for-like slack.
Matrix to_threshold_scale(Matrix d_db);

struct ScaleFactors {
  Matrix phi_db;   // H - D, the remaining acceptable distortion
  Matrix phi_hat;  // min-max normalized (H - D + lambda, clamped at 0)
  Matrix h_hat;    // min-max normalized H
};

// Degenerate normalizations (max == min) produce constant 0.5 matrices so
// a usable mid-scale gradient survives.
ScaleFactors scale_factors(const Matrix& h_db, const Matrix& d_db,
                           double lambda_db);

// One iteration: forward, loss, backward through the model and the
// preprocessing, optional masking of the spectral gradient, then the
// update x <- x - lr * grad.  Returns the loss before the update.
// `thresholds` == nullptr disables the masking.
double attack_step(AudioSignal& x, const StateAlignment& target,
                   const ToyAcousticModel& model,
                   const SpectroGrid& original_grid,
                   const ThresholdMatrix* thresholds, const AttackConfig& cfg,
                   int iteration);

// Same step with an explicit spectral scale (or nullptr for none); the
// public attack_step derives the scale from the thresholds and calls this.
double attack_step_scaled(AudioSignal& x, const StateAlignment& target,
                          const ToyAcousticModel& model,
                          const Matrix* spectral_scale,
                          const AttackConfig& cfg, int iteration);

// The full loop: phone-rate gate, thresholds and alignment once up front,
// iterate attack_step, decode every check_every iterations, stop at WER 0
// or the iteration budget.  The report always carries phi, SNR and the
// final decode, whatever the outcome.
AttackResult run_attack(const AudioSignal& original,
                        const std::vector<std::string>& target_words,
                        const ToyAcousticModel& model,
                        const DecodingGraph& graph, const AttackConfig& cfg);

}  // namespace psyhide

#endif  // PSYHIDE_CORE_ATTACK_HPP_
