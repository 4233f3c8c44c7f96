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

#include "core/attack.hpp"

#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/metrics.hpp"

namespace psyhide {

void AttackConfig::validate() const {
  // A zero learning rate is allowed: the run then just measures.
  if (learning_rate < 0.0) {
    throw ArgumentError("learning rate must be non-negative");
  }
  if (lambda_db < 0.0) {
    throw ArgumentError("lambda must be non-negative");
  }
  if (check_every < 1) {
    throw ArgumentError("check_every must be at least 1");
  }
  if (max_iterations < 0) {
    throw ArgumentError("iteration budget must be non-negative");
  }
  if (realign_every < 0) {
    throw ArgumentError("realign cadence must be non-negative");
  }
  if (phone_rate_limit <= 0.0) {
    throw ArgumentError("phone rate limit must be positive");
  }
  frame.validate();
}

Matrix difference_matrix(const SpectroGrid& original,
                         const SpectroGrid& modified) {
  if (original.frames != modified.frames ||
      original.bins() != modified.bins()) {
    throw DimensionError("spectro grids differ in shape");
  }
  const double ref = original.max_magnitude();
  if (ref <= 0.0) {
    throw ArgumentError("difference reference is zero (silent original)");
  }
  Matrix d(original.frames, original.bins());
  for (std::size_t t = 0; t < original.frames; ++t) {
    for (std::size_t k = 0; k < original.bins(); ++k) {
      const double dre = original.re.at(t, k) - modified.re.at(t, k);
      const double dim = original.im.at(t, k) - modified.im.at(t, k);
      const double mag = std::max(std::hypot(dre, dim), kDifferenceEpsilon);
      d.at(t, k) = 20.0 * std::log10(mag / ref);
    }
  }
  return d;
}

Matrix to_threshold_scale(Matrix d_db) {
  for (std::size_t t = 0; t < d_db.rows(); ++t) {
    double* row = d_db.row(t);
    for (std::size_t k = 0; k < d_db.cols(); ++k) {
      row[k] += kSplReferenceDb;
    }
  }
  return d_db;
}

namespace {

// Min-max to [0, 1]; a constant matrix maps to all 0.5.
Matrix minmax_normalize(const Matrix& m) {
  const double lo = m.min_value();
  const double hi = m.max_value();
  Matrix out(m.rows(), m.cols());
  if (hi <= lo) {
    for (std::size_t i = 0; i < out.rows(); ++i) {
      for (std::size_t j = 0; j < out.cols(); ++j) out.at(i, j) = 0.5;
    }
    return out;
  }
  const double span = hi - lo;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      out.at(i, j) = (m.at(i, j) - lo) / span;
    }
  }
  return out;
}

}  // namespace

ScaleFactors scale_factors(const Matrix& h_db, const Matrix& d_db,
                           double lambda_db) {
  h_db.require_same_shape(d_db, "scale factors");
  ScaleFactors out;
  out.phi_db = Matrix(h_db.rows(), h_db.cols());
  Matrix phi_star(h_db.rows(), h_db.cols());
  for (std::size_t t = 0; t < h_db.rows(); ++t) {
    for (std::size_t k = 0; k < h_db.cols(); ++k) {
      const double slack = h_db.at(t, k) - d_db.at(t, k);
      out.phi_db.at(t, k) = slack;
      // Negative slack means the threshold is already crossed; those bins
      // must not receive more noise.
      phi_star.at(t, k) = std::max(slack + lambda_db, 0.0);
    }
  }
  out.phi_hat = minmax_normalize(phi_star);
  out.h_hat = minmax_normalize(h_db);
  return out;
}

namespace {

double step_from_forward(AudioSignal& x, const PreprocessResult& pre,
                         const StateAlignment& target,
                         const ToyAcousticModel& model,
                         const Matrix* spectral_scale, const AttackConfig& cfg,
                         int iteration) {
  ModelTrace trace;
  model.forward(pre.features, &trace);
  const CrossEntropyResult ce = cross_entropy_loss(trace.posteriors, target);
  if (std::isnan(ce.loss)) {
    throw NumericError("NaN loss at iteration " + std::to_string(iteration));
  }
  const Matrix grad_features = model.backward_features(trace, ce.grad);
  for (std::size_t t = 0; t < grad_features.rows(); ++t) {
    for (std::size_t k = 0; k < grad_features.cols(); ++k) {
      if (std::isnan(grad_features.at(t, k))) {
        throw NumericError("NaN feature gradient at iteration " +
                           std::to_string(iteration) + ", bin (" +
                           std::to_string(t) + ", " + std::to_string(k) + ")");
      }
    }
  }

  const std::vector<double> grad_x =
      backward_preprocess(grad_features, pre.grid, spectral_scale);
  for (std::size_t i = 0; i < grad_x.size(); ++i) {
    if (std::isnan(grad_x[i])) {
      throw NumericError("NaN sample gradient at iteration " +
                         std::to_string(iteration) + ", sample " +
                         std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    x.samples[i] -= cfg.learning_rate * grad_x[i];
  }
  return ce.loss;
}

}  // namespace

double attack_step_scaled(AudioSignal& x, const StateAlignment& target,
                          const ToyAcousticModel& model,
                          const Matrix* spectral_scale,
                          const AttackConfig& cfg, int iteration) {
  const PreprocessResult pre = forward_preprocess(x, cfg.frame);
  return step_from_forward(x, pre, target, model, spectral_scale, cfg,
                           iteration);
}

double attack_step(AudioSignal& x, const StateAlignment& target,
                   const ToyAcousticModel& model,
                   const SpectroGrid& original_grid,
                   const ThresholdMatrix* thresholds, const AttackConfig& cfg,
                   int iteration) {
  const PreprocessResult pre = forward_preprocess(x, cfg.frame);
  if (thresholds == nullptr) {
    return step_from_forward(x, pre, target, model, nullptr, cfg, iteration);
  }
  // D is refreshed from the current signal on every iteration.
  const Matrix d95 =
      to_threshold_scale(difference_matrix(original_grid, pre.grid));
  const ScaleFactors sf =
      scale_factors(thresholds->h_db, d95, cfg.lambda_db);
  Matrix scale(sf.phi_hat.rows(), sf.phi_hat.cols());
  for (std::size_t t = 0; t < scale.rows(); ++t) {
    for (std::size_t k = 0; k < scale.cols(); ++k) {
      scale.at(t, k) = sf.phi_hat.at(t, k) * sf.h_hat.at(t, k);
    }
  }
  return step_from_forward(x, pre, target, model, &scale, cfg, iteration);
}

namespace {

void dump_spectra(const std::string& dir, const SpectroGrid& s_grid,
                  const SpectroGrid& m_grid, const Matrix& d95,
                  const Matrix& h_db) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create dump directory: " + dir);
  }
  const double ref = s_grid.max_magnitude();
  auto grid_db = [ref](const SpectroGrid& g) {
    Matrix out(g.frames, g.bins());
    for (std::size_t t = 0; t < g.frames; ++t) {
      for (std::size_t k = 0; k < g.bins(); ++k) {
        const double mag = std::max(g.magnitude(t, k), kDifferenceEpsilon);
        out.at(t, k) = 20.0 * std::log10(mag / ref) + kSplReferenceDb;
      }
    }
    return out;
  };
  write_csv(grid_db(s_grid), dir + "/original_db.csv");
  write_csv(grid_db(m_grid), dir + "/adversarial_db.csv");
  write_csv(d95, dir + "/difference_db.csv");
  write_csv(h_db, dir + "/thresholds_db.csv");
}

}  // namespace

AttackResult run_attack(const AudioSignal& original,
                        const std::vector<std::string>& target_words,
                        const ToyAcousticModel& model,
                        const DecodingGraph& graph, const AttackConfig& cfg) {
  cfg.validate();
  if (target_words.empty()) {
    throw ArgumentError("target word sequence is empty");
  }

  AttackResult result;
  AttackReport& report = result.report;
  report.config = cfg;
  report.target_transcript = join_words(target_words);

  const PhoneRateResult rate = phone_rate_check(
      target_words, original.duration_s(), cfg.phone_rate_limit,
      graph.inventory());
  report.phone_rate = rate.rate;
  if (!rate.pass) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "target phone rate %.2f/s exceeds the limit %.2f/s",
                  rate.rate, cfg.phone_rate_limit);
    throw InfeasibleError(msg);
  }

  // Thresholds and alignment are both computed once, up front, from the
  // original signal.
  const PreprocessResult original_pre = forward_preprocess(original, cfg.frame);
  const ThresholdMatrix thresholds = compute_thresholds(original, cfg.frame);

  const Matrix posteriors0 = model.forward(original_pre.features);
  StateAlignment alignment =
      cfg.use_forced_alignment
          ? forced_align(posteriors0, target_words, graph)
          : equal_align(target_words, original_pre.grid.frames, graph);
  report.alignment_source =
      alignment.source == StateAlignment::Source::kForced ? "forced" : "equal";
  report.alignment_fallback = alignment.fallback_warning;

  std::vector<std::string> decoded = viterbi_decode(posteriors0, graph);
  report.initial_wer = wer(target_words, decoded).wer;
  report.final_wer = report.initial_wer;

  result.adversarial = original;
  AudioSignal& x = result.adversarial;
  bool success = report.initial_wer == 0.0;

  if (!success) {
    for (int i = 1; i <= cfg.max_iterations; ++i) {
      if (cfg.realign_every > 0 && i > 1 && (i - 1) % cfg.realign_every == 0 &&
          cfg.use_forced_alignment) {
        const PreprocessResult cur = forward_preprocess(x, cfg.frame);
        alignment = forced_align(model.forward(cur.features), target_words,
                                 graph);
      }
      const double loss =
          attack_step(x, alignment, model, original_pre.grid,
                      cfg.use_thresholds ? &thresholds : nullptr, cfg, i);
      report.loss_history.push_back(loss);
      report.iterations_used = i;

      if (i % cfg.check_every == 0 || i == cfg.max_iterations) {
        const PreprocessResult cur = forward_preprocess(x, cfg.frame);
        decoded = viterbi_decode(model.forward(cur.features), graph);
        report.final_wer = wer(target_words, decoded).wer;
        if (report.final_wer == 0.0) {
          success = true;
          break;
        }
      }
    }
  }

  report.success = success;
  report.decoded_transcript = join_words(decoded);

  // Final measurements against the original.
  const PreprocessResult final_pre = forward_preprocess(x, cfg.frame);
  const Matrix d95 =
      to_threshold_scale(difference_matrix(original_pre.grid, final_pre.grid));
  Matrix excess(d95.rows(), d95.cols());
  for (std::size_t t = 0; t < d95.rows(); ++t) {
    for (std::size_t k = 0; k < d95.cols(); ++k) {
      excess.at(t, k) = d95.at(t, k) - thresholds.h_db.at(t, k);
    }
  }
  report.phi_db = phi(excess);
  report.snr_db = snr_db(original, x);

  if (!cfg.dump_spectra_dir.empty()) {
    dump_spectra(cfg.dump_spectra_dir, original_pre.grid, final_pre.grid, d95,
                 thresholds.h_db);
  }
  return result;
}

std::string AttackReport::to_json() const {
  nlohmann::ordered_json j;
  j["success"] = success;
  j["iterations_used"] = iterations_used;
  j["initial_wer"] = initial_wer;
  j["final_wer"] = final_wer;
  j["phi_db"] = phi_db;
  if (std::isinf(snr_db)) {
    j["snr_db"] = "inf";
  } else {
    j["snr_db"] = snr_db;
  }
  j["phone_rate"] = phone_rate;
  j["alignment"] = {{"source", alignment_source},
                    {"fallback", alignment_fallback}};
  j["target"] = target_transcript;
  j["decoded"] = decoded_transcript;
  j["config"] = {{"lambda_db", config.lambda_db},
                 {"learning_rate", config.learning_rate},
                 {"max_iterations", config.max_iterations},
                 {"check_every", config.check_every},
                 {"use_thresholds", config.use_thresholds},
                 {"use_forced_alignment", config.use_forced_alignment},
                 {"seed", config.seed},
                 {"realign_every", config.realign_every},
                 {"phone_rate_limit", config.phone_rate_limit},
                 {"frame",
                  {{"frame_len", config.frame.frame_len},
                   {"hop", config.frame.hop},
                   {"dft_size", config.frame.dft_size}}}};
  j["loss_history"] = loss_history;
  return j.dump(2) + "\n";
}

}  // namespace psyhide
