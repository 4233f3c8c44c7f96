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

#ifndef PSYHIDE_CORE_ACOUSTIC_MODEL_HPP_
#define PSYHIDE_CORE_ACOUSTIC_MODEL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "core/decoder.hpp"
#include "core/frontend.hpp"
#include "core/lexicon.hpp"
#include "core/matrix.hpp"
#include "core/synth.hpp"

namespace psyhide {

// Posterior clamp inside the cross-entropy; the loss is singular at zero.
inline constexpr double kCrossEntropyEpsilon = 1e-12;

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // row-major [out][in]
  std::vector<double> bias;     // [out]
};

// Forward cache for one utterance, reused by the backward passes.
struct ModelTrace {
  std::size_t frames = 0;
  Matrix spliced;                   // frames x (splice * bins)
  std::vector<Matrix> activations;  // post-nonlinearity per hidden layer
  Matrix posteriors;                // frames x states, softmax rows
};

// Small feed-forward state classifier: fixed input scaling, tanh hidden
// layers, linear output, softmax.  Each decision sees the features of
// frames t-c .. t+c concatenated (edges clamped).
class ToyAcousticModel {
 public:
  ToyAcousticModel() = default;

  static ToyAcousticModel random_init(int input_bins, int context_radius,
                                      const std::vector<int>& hidden_sizes,
                                      int state_count, std::uint64_t seed);

  int input_bins() const { return input_bins_; }
  int context_radius() const { return context_radius_; }
  int splice_width() const { return 2 * context_radius_ + 1; }
  int state_count() const { return state_count_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  // Posteriors for a whole utterance; rows sum to one.
  Matrix forward(const Matrix& features) const;
  void forward(const Matrix& features, ModelTrace* trace) const;

  // Chain rule back to the feature matrix, including the context-window
  // scatter.  The trace variant reuses cached activations.
  Matrix backward_features(const ModelTrace& trace,
                           const Matrix& grad_posteriors) const;
  Matrix backward_features(const Matrix& features,
                           const Matrix& grad_posteriors) const;

  // Fixed per-bin affine input transform, (x + shift) * scale.  Training
  // estimates it from the corpus (mean/variance normalization); it is part
  // of the model and of the backward pass.
  void set_input_normalization(std::vector<double> shift,
                               std::vector<double> scale);

  void save(const std::string& path, const PhoneInventory& inv) const;
  static ToyAcousticModel load(const std::string& path,
                               const PhoneInventory& inv);

 private:
  friend struct ModelGradient;

  void validate_features(const Matrix& features) const;
  void splice_row(const Matrix& features, std::size_t t, double* out) const;

  int input_bins_ = 0;
  int context_radius_ = 2;
  int state_count_ = 0;
  std::vector<double> input_shift_;  // per bin
  std::vector<double> input_scale_;  // per bin
  std::vector<DenseLayer> layers_;
};

struct CrossEntropyResult {
  double loss = 0.0;
  Matrix grad;  // d loss / d posteriors, frames x states
};

// L = -(1/T) sum_t log y(t, target_t); the gradient is
// -1 / (T y(t, target_t)) at the target entries and zero elsewhere,
// with posteriors clamped at kCrossEntropyEpsilon.
CrossEntropyResult cross_entropy_loss(const Matrix& posteriors,
                                      const StateAlignment& target);

struct TrainOptions {
  int epochs = 15;               // per training round
  double learning_rate = 0.05;
  double momentum = 0.9;
  int batch_utterances = 1;      // utterances per gradient update
  double holdout_fraction = 0.1;
  double label_smoothing = 0.05; // keeps posteriors off the hard 0/1 walls
  double weight_decay = 1e-4;
  std::uint64_t seed = 1;
  bool realign = true;           // second round on forced alignment
};

struct TrainResult {
  double holdout_frame_accuracy = 0.0;
  std::vector<double> epoch_losses;  // full training-set loss after each epoch
  int epochs_run = 0;
};

// Two-round training: gradient descent on equal-alignment targets, one
// forced realignment pass, then a second round.  epochs == 0 leaves the
// model untouched.
TrainResult train_toy(ToyAcousticModel& model,
                      const std::vector<LabeledUtterance>& corpus,
                      const PhoneInventory& inv, const FrameConfig& frame_cfg,
                      const TrainOptions& opts);

}  // namespace psyhide

#endif  // PSYHIDE_CORE_ACOUSTIC_MODEL_HPP_
