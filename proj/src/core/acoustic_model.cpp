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

#include "core/acoustic_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace psyhide {

namespace {

void dense_forward(const DenseLayer& layer, const double* in, double* out) {
  for (std::size_t o = 0; o < layer.out; ++o) {
    const double* w = layer.weights.data() + o * layer.in;
    double acc = layer.bias[o];
    for (std::size_t i = 0; i < layer.in; ++i) acc += w[i] * in[i];
    out[o] = acc;
  }
}

// grad_in += W^T grad_out
void dense_backward_input(const DenseLayer& layer, const double* grad_out,
                          double* grad_in) {
  for (std::size_t o = 0; o < layer.out; ++o) {
    const double g = grad_out[o];
    if (g == 0.0) continue;
    const double* w = layer.weights.data() + o * layer.in;
    for (std::size_t i = 0; i < layer.in; ++i) grad_in[i] += g * w[i];
  }
}

void softmax_row(double* v, std::size_t n) {
  double mx = v[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, v[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = std::exp(v[i] - mx);
    sum += v[i];
  }
  for (std::size_t i = 0; i < n; ++i) v[i] /= sum;
}

}  // namespace

ToyAcousticModel ToyAcousticModel::random_init(
    int input_bins, int context_radius, const std::vector<int>& hidden_sizes,
    int state_count, std::uint64_t seed) {
  if (input_bins < 1 || context_radius < 0 || state_count < 2) {
    throw ArgumentError("bad model dimensions");
  }
  ToyAcousticModel m;
  m.input_bins_ = input_bins;
  m.context_radius_ = context_radius;
  m.state_count_ = state_count;
  // Neutral-ish default normalization for untrained models; training
  // replaces it with corpus statistics.
  m.input_shift_.assign(static_cast<std::size_t>(input_bins), 6.0);
  m.input_scale_.assign(static_cast<std::size_t>(input_bins), 0.125);

  Rng rng(seed);
  std::size_t prev = static_cast<std::size_t>(input_bins) *
                     static_cast<std::size_t>(m.splice_width());
  std::vector<std::size_t> dims;
  for (int h : hidden_sizes) {
    if (h < 1) throw ArgumentError("hidden sizes must be positive");
    dims.push_back(static_cast<std::size_t>(h));
  }
  dims.push_back(static_cast<std::size_t>(state_count));

  for (std::size_t d : dims) {
    DenseLayer layer;
    layer.in = prev;
    layer.out = d;
    layer.weights.resize(layer.in * layer.out);
    layer.bias.assign(layer.out, 0.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (double& w : layer.weights) w = rng.uniform(-scale, scale);
    m.layers_.push_back(std::move(layer));
    prev = d;
  }
  return m;
}

void ToyAcousticModel::validate_features(const Matrix& features) const {
  if (features.rows() == 0) {
    throw DimensionError("feature matrix has no frames");
  }
  if (features.cols() != static_cast<std::size_t>(input_bins_)) {
    throw DimensionError("feature bins (" + std::to_string(features.cols()) +
                         ") do not match model input (" +
                         std::to_string(input_bins_) + ")");
  }
}

void ToyAcousticModel::set_input_normalization(std::vector<double> shift,
                                               std::vector<double> scale) {
  if (shift.size() != static_cast<std::size_t>(input_bins_) ||
      scale.size() != static_cast<std::size_t>(input_bins_)) {
    throw DimensionError("normalization vectors must match input bins");
  }
  input_shift_ = std::move(shift);
  input_scale_ = std::move(scale);
}

void ToyAcousticModel::splice_row(const Matrix& features, std::size_t t,
                                  double* out) const {
  const std::ptrdiff_t frames = static_cast<std::ptrdiff_t>(features.rows());
  const std::size_t bins = features.cols();
  std::size_t pos = 0;
  for (int c = -context_radius_; c <= context_radius_; ++c) {
    std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) + c;
    src = std::clamp<std::ptrdiff_t>(src, 0, frames - 1);  // edge duplication
    const double* row = features.row(static_cast<std::size_t>(src));
    for (std::size_t k = 0; k < bins; ++k) {
      out[pos++] = (row[k] + input_shift_[k]) * input_scale_[k];
    }
  }
}

void ToyAcousticModel::forward(const Matrix& features,
                               ModelTrace* trace) const {
  validate_features(features);
  const std::size_t frames = features.rows();
  const std::size_t in_width = layers_.front().in;

  trace->frames = frames;
  trace->spliced = Matrix(frames, in_width);
  trace->activations.assign(layers_.size() - 1, Matrix());
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    trace->activations[l] = Matrix(frames, layers_[l].out);
  }
  trace->posteriors = Matrix(frames, layers_.back().out);

  for (std::size_t t = 0; t < frames; ++t) {
    splice_row(features, t, trace->spliced.row(t));
    const double* in = trace->spliced.row(t);
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
      double* act = trace->activations[l].row(t);
      dense_forward(layers_[l], in, act);
      for (std::size_t o = 0; o < layers_[l].out; ++o) act[o] = std::tanh(act[o]);
      in = act;
    }
    double* post = trace->posteriors.row(t);
    dense_forward(layers_.back(), in, post);
    softmax_row(post, layers_.back().out);
  }
}

Matrix ToyAcousticModel::forward(const Matrix& features) const {
  ModelTrace trace;
  forward(features, &trace);
  return trace.posteriors;
}

Matrix ToyAcousticModel::backward_features(const ModelTrace& trace,
                                           const Matrix& grad_posteriors) const {
  trace.posteriors.require_same_shape(grad_posteriors, "posterior cotangent");
  const std::size_t frames = trace.frames;
  const std::size_t bins = static_cast<std::size_t>(input_bins_);
  Matrix grad_features(frames, bins);

  std::vector<double> g_out;
  std::vector<double> g_in;
  for (std::size_t t = 0; t < frames; ++t) {
    // Softmax Jacobian: g_a = y * (g_y - <g_y, y>).
    const double* y = trace.posteriors.row(t);
    const double* gy = grad_posteriors.row(t);
    const std::size_t q = layers_.back().out;
    g_out.assign(q, 0.0);
    double dot = 0.0;
    for (std::size_t i = 0; i < q; ++i) dot += gy[i] * y[i];
    for (std::size_t i = 0; i < q; ++i) g_out[i] = y[i] * (gy[i] - dot);

    for (std::size_t l = layers_.size(); l-- > 0;) {
      g_in.assign(layers_[l].in, 0.0);
      dense_backward_input(layers_[l], g_out.data(), g_in.data());
      if (l > 0) {
        // through the tanh of the previous hidden layer
        const double* act = trace.activations[l - 1].row(t);
        for (std::size_t i = 0; i < layers_[l].in; ++i) {
          g_in[i] *= 1.0 - act[i] * act[i];
        }
      }
      g_out = g_in;
    }

    // Undo the splice: scatter each context slot back to its source frame.
    const std::ptrdiff_t maxf = static_cast<std::ptrdiff_t>(frames) - 1;
    std::size_t pos = 0;
    for (int c = -context_radius_; c <= context_radius_; ++c) {
      std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) + c;
      src = std::clamp<std::ptrdiff_t>(src, 0, maxf);
      double* dst = grad_features.row(static_cast<std::size_t>(src));
      for (std::size_t k = 0; k < bins; ++k) {
        dst[k] += g_out[pos++] * input_scale_[k];
      }
    }
  }
  return grad_features;
}

Matrix ToyAcousticModel::backward_features(const Matrix& features,
                                           const Matrix& grad_posteriors) const {
  ModelTrace trace;
  forward(features, &trace);
  return backward_features(trace, grad_posteriors);
}

CrossEntropyResult cross_entropy_loss(const Matrix& posteriors,
                                      const StateAlignment& target) {
  const std::size_t frames = posteriors.rows();
  if (target.frames() != frames) {
    throw DimensionError("alignment length (" +
                         std::to_string(target.frames()) +
                         ") does not match posterior frames (" +
                         std::to_string(frames) + ")");
  }
  CrossEntropyResult out;
  out.grad = Matrix(frames, posteriors.cols());
  const double t_norm = static_cast<double>(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    const int s = target.states[t];
    if (s < 0 || static_cast<std::size_t>(s) >= posteriors.cols()) {
      throw DimensionError("target state " + std::to_string(s) +
                           " outside posterior columns");
    }
    const double y = std::max(posteriors.at(t, static_cast<std::size_t>(s)),
                              kCrossEntropyEpsilon);
    out.loss -= std::log(y) / t_norm;
    out.grad.at(t, static_cast<std::size_t>(s)) = -1.0 / (t_norm * y);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct SgdState {
  std::vector<std::vector<double>> w_vel;
  std::vector<std::vector<double>> b_vel;
  std::vector<std::vector<double>> w_grad;
  std::vector<std::vector<double>> b_grad;

  explicit SgdState(const std::vector<DenseLayer>& layers) {
    for (const DenseLayer& l : layers) {
      w_vel.emplace_back(l.weights.size(), 0.0);
      b_vel.emplace_back(l.bias.size(), 0.0);
      w_grad.emplace_back(l.weights.size(), 0.0);
      b_grad.emplace_back(l.bias.size(), 0.0);
    }
  }

  void zero_grad() {
    for (auto& g : w_grad) std::fill(g.begin(), g.end(), 0.0);
    for (auto& g : b_grad) std::fill(g.begin(), g.end(), 0.0);
  }
};

}  // namespace

// Accumulates weight gradients and applies SGD with momentum; declared as a
// friend so training can touch the layers directly.
struct ModelGradient {
  static void accumulate(const ToyAcousticModel& model, const ModelTrace& trace,
                         std::size_t t, int target_state, double weight,
                         double label_smoothing, SgdState* sgd) {
    const auto& layers = model.layers_;
    const std::size_t q = layers.back().out;
    const double* y = trace.posteriors.row(t);

    // d CE / d logits for a smoothed one-hot target: q_i = ls/Q plus
    // 1 - ls on the target entry.
    const double off = label_smoothing / static_cast<double>(q);
    std::vector<double> g_out(q);
    for (std::size_t i = 0; i < q; ++i) g_out[i] = weight * (y[i] - off);
    g_out[static_cast<std::size_t>(target_state)] -=
        weight * (1.0 - label_smoothing);

    std::vector<double> g_in;
    for (std::size_t l = layers.size(); l-- > 0;) {
      const double* input = l == 0 ? trace.spliced.row(t)
                                   : trace.activations[l - 1].row(t);
      auto& wg = sgd->w_grad[l];
      auto& bg = sgd->b_grad[l];
      for (std::size_t o = 0; o < layers[l].out; ++o) {
        const double g = g_out[o];
        if (g == 0.0) continue;
        double* row = wg.data() + o * layers[l].in;
        for (std::size_t i = 0; i < layers[l].in; ++i) row[i] += g * input[i];
        bg[o] += g;
      }
      if (l == 0) break;
      g_in.assign(layers[l].in, 0.0);
      dense_backward_input(layers[l], g_out.data(), g_in.data());
      const double* act = trace.activations[l - 1].row(t);
      for (std::size_t i = 0; i < layers[l].in; ++i) {
        g_in[i] *= 1.0 - act[i] * act[i];
      }
      g_out = g_in;
    }
  }

  static void apply(ToyAcousticModel* model, SgdState* sgd, double lr,
                    double momentum, double weight_decay) {
    auto& layers = model->layers_;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& w = layers[l].weights;
      auto& v = sgd->w_vel[l];
      const auto& g = sgd->w_grad[l];
      for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = momentum * v[i] - lr * (g[i] + weight_decay * w[i]);
        w[i] += v[i];
        if (std::isnan(w[i])) {
          throw NumericError("NaN weight during training");
        }
      }
      auto& b = layers[l].bias;
      auto& bv = sgd->b_vel[l];
      const auto& bg = sgd->b_grad[l];
      for (std::size_t i = 0; i < b.size(); ++i) {
        bv[i] = momentum * bv[i] - lr * bg[i];
        b[i] += bv[i];
      }
    }
  }
};

TrainResult train_toy(ToyAcousticModel& model,
                      const std::vector<LabeledUtterance>& corpus,
                      const PhoneInventory& inv, const FrameConfig& frame_cfg,
                      const TrainOptions& opts) {
  if (corpus.empty()) {
    throw ArgumentError("training corpus is empty");
  }
  if (opts.epochs < 0) {
    throw ArgumentError("epoch count must be non-negative");
  }
  for (const LabeledUtterance& utt : corpus) {
    for (const std::string& w : utt.words) {
      if (!inv.has_word(w)) {
        throw LexiconError("corpus word not in lexicon: " + w);
      }
    }
  }

  const DecodingGraph graph(inv);
  Rng rng(opts.seed);

  // Features are fixed; compute them once.
  std::vector<Matrix> features;
  features.reserve(corpus.size());
  for (const LabeledUtterance& utt : corpus) {
    features.push_back(forward_preprocess(utt.audio, frame_cfg).features);
  }

  // Mean/variance normalization per bin, estimated on the whole corpus and
  // frozen into the model as its input transform.
  if (opts.epochs > 0) {
    const std::size_t bins = features.front().cols();
    std::vector<double> mean(bins, 0.0);
    std::vector<double> sq(bins, 0.0);
    std::size_t count = 0;
    for (const Matrix& f : features) {
      for (std::size_t t = 0; t < f.rows(); ++t) {
        const double* row = f.row(t);
        for (std::size_t k = 0; k < bins; ++k) {
          mean[k] += row[k];
          sq[k] += row[k] * row[k];
        }
      }
      count += f.rows();
    }
    std::vector<double> shift(bins);
    std::vector<double> scale(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      mean[k] /= static_cast<double>(count);
      const double var = sq[k] / static_cast<double>(count) - mean[k] * mean[k];
      shift[k] = -mean[k];
      scale[k] = 1.0 / std::max(std::sqrt(std::max(var, 0.0)), 0.5);
    }
    model.set_input_normalization(std::move(shift), std::move(scale));
  }

  // Seeded shuffle, then the tail becomes the held-out set.
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  std::size_t holdout_count = static_cast<std::size_t>(
      std::ceil(opts.holdout_fraction * static_cast<double>(corpus.size())));
  if (holdout_count >= corpus.size()) holdout_count = corpus.size() - 1;
  const std::vector<std::size_t> train_set(order.begin(),
                                           order.end() - holdout_count);
  const std::vector<std::size_t> holdout_set(order.end() - holdout_count,
                                             order.end());

  TrainResult result;

  auto make_labels = [&](bool forced) {
    std::vector<StateAlignment> labels(corpus.size());
    for (std::size_t u : train_set) {
      if (forced) {
        labels[u] = forced_align(model.forward(features[u]), corpus[u].words,
                                 graph);
      } else {
        labels[u] = equal_align(corpus[u].words, features[u].rows(), graph);
      }
    }
    return labels;
  };

  // Post-epoch loss is evaluated on a fixed slice of the training set so
  // the recorded curve is a deterministic function of the model state.
  const std::vector<std::size_t> loss_probe(
      train_set.begin(),
      train_set.begin() + std::min<std::size_t>(train_set.size(), 12));
  auto probe_loss = [&](const std::vector<StateAlignment>& labels) {
    double total = 0.0;
    std::size_t frames = 0;
    for (std::size_t u : loss_probe) {
      const Matrix post = model.forward(features[u]);
      total += cross_entropy_loss(post, labels[u]).loss *
               static_cast<double>(labels[u].frames());
      frames += labels[u].frames();
    }
    return total / static_cast<double>(frames);
  };

  // Minibatch = a few whole utterances; one forward pass per utterance per
  // update keeps the trace fresh without redundant recomputation.
  auto run_round = [&](const std::vector<StateAlignment>& labels) {
    std::vector<std::size_t> utts = train_set;
    SgdState sgd(model.layers());
    const std::size_t per_batch = std::max(1, opts.batch_utterances);

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
      for (std::size_t i = utts.size(); i > 1; --i) {
        std::swap(utts[i - 1], utts[rng.uniform_index(i)]);
      }
      std::size_t done = 0;
      while (done < utts.size()) {
        const std::size_t batch = std::min(per_batch, utts.size() - done);
        sgd.zero_grad();
        std::size_t batch_frames = 0;
        for (std::size_t b = 0; b < batch; ++b) {
          batch_frames += labels[utts[done + b]].frames();
        }
        const double w = 1.0 / static_cast<double>(batch_frames);
        for (std::size_t b = 0; b < batch; ++b) {
          const std::size_t u = utts[done + b];
          ModelTrace trace;
          model.forward(features[u], &trace);
          for (std::size_t t = 0; t < trace.frames; ++t) {
            ModelGradient::accumulate(model, trace, t, labels[u].states[t], w,
                                      opts.label_smoothing, &sgd);
          }
        }
        ModelGradient::apply(&model, &sgd, opts.learning_rate, opts.momentum,
                             opts.weight_decay);
        done += batch;
      }
      result.epoch_losses.push_back(probe_loss(labels));
      ++result.epochs_run;
    }
  };

  if (opts.epochs > 0) {
    run_round(make_labels(/*forced=*/false));
    if (opts.realign) {
      run_round(make_labels(/*forced=*/true));
    }
  }

  // Held-out frame accuracy against forced alignments under the final model.
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t u : holdout_set) {
    const Matrix post = model.forward(features[u]);
    const StateAlignment ref = forced_align(post, corpus[u].words, graph);
    for (std::size_t t = 0; t < ref.frames(); ++t) {
      std::size_t best = 0;
      for (std::size_t q = 1; q < post.cols(); ++q) {
        if (post.at(t, q) > post.at(t, best)) best = q;
      }
      correct += static_cast<int>(best) == ref.states[t] ? 1 : 0;
      ++total;
    }
  }
  result.holdout_frame_accuracy =
      total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

void ToyAcousticModel::save(const std::string& path,
                            const PhoneInventory& inv) const {
  nlohmann::ordered_json j;
  j["format"] = "psyhide-model";
  j["version"] = 1;
  j["input_bins"] = input_bins_;
  j["context_radius"] = context_radius_;
  j["state_count"] = state_count_;
  j["states_per_phone"] = inv.states_per_phone();
  j["phones"] = inv.phones();
  j["input_shift"] = input_shift_;
  j["input_scale"] = input_scale_;
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const DenseLayer& l : layers_) {
    nlohmann::ordered_json lj;
    lj["in"] = l.in;
    lj["out"] = l.out;
    lj["weights"] = l.weights;
    lj["bias"] = l.bias;
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);

  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << j.dump() << '\n';
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

ToyAcousticModel ToyAcousticModel::load(const std::string& path,
                                        const PhoneInventory& inv) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open checkpoint: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad checkpoint JSON: " + std::string(e.what()));
  }
  if (j.value("format", "") != "psyhide-model" || j.value("version", 0) != 1) {
    throw FormatError("unrecognized checkpoint format: " + path);
  }

  const auto phones = j.at("phones").get<std::vector<std::string>>();
  if (phones != inv.phones() ||
      j.at("states_per_phone").get<int>() != inv.states_per_phone()) {
    throw LexiconError(
        "checkpoint phone set does not match the lexicon; the model was "
        "trained with a different inventory");
  }

  ToyAcousticModel m;
  m.input_bins_ = j.at("input_bins").get<int>();
  m.context_radius_ = j.at("context_radius").get<int>();
  m.state_count_ = j.at("state_count").get<int>();
  m.input_shift_ = j.at("input_shift").get<std::vector<double>>();
  m.input_scale_ = j.at("input_scale").get<std::vector<double>>();
  if (m.input_shift_.size() != static_cast<std::size_t>(m.input_bins_) ||
      m.input_scale_.size() != static_cast<std::size_t>(m.input_bins_)) {
    throw FormatError("normalization vectors do not match input bins");
  }
  if (m.state_count_ != inv.state_count()) {
    throw LexiconError("checkpoint state count does not match the lexicon");
  }
  for (const auto& lj : j.at("layers")) {
    DenseLayer l;
    l.in = lj.at("in").get<std::size_t>();
    l.out = lj.at("out").get<std::size_t>();
    l.weights = lj.at("weights").get<std::vector<double>>();
    l.bias = lj.at("bias").get<std::vector<double>>();
    if (l.weights.size() != l.in * l.out || l.bias.size() != l.out) {
      throw FormatError("layer shape mismatch in checkpoint");
    }
    m.layers_.push_back(std::move(l));
  }
  if (m.layers_.empty() || m.layers_.back().out !=
                               static_cast<std::size_t>(m.state_count_)) {
    throw FormatError("checkpoint layers do not end in the state count");
  }
  return m;
}

}  // namespace psyhide
