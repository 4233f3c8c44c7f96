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

#include "psyhide.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "core/attack.hpp"
#include "core/audio_io.hpp"
#include "core/decoder.hpp"
#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/psychoacoustics.hpp"
#include "core/synth.hpp"

namespace {

thread_local std::string t_last_error;

void set_error(const std::string& msg) { t_last_error = msg; }

// Translates core exceptions into status codes at the ABI boundary.
template <typename Fn>
ph_status guarded(Fn&& fn) {
  try {
    fn();
    return PH_OK;
  } catch (const psyhide::IoError& e) {
    set_error(e.what());
    return PH_ERR_IO;
  } catch (const psyhide::FormatError& e) {
    set_error(e.what());
    return PH_ERR_FORMAT;
  } catch (const psyhide::ArgumentError& e) {
    set_error(e.what());
    return PH_ERR_ARGUMENT;
  } catch (const psyhide::DimensionError& e) {
    set_error(e.what());
    return PH_ERR_DIMENSION;
  } catch (const psyhide::LexiconError& e) {
    set_error(e.what());
    return PH_ERR_LEXICON;
  } catch (const psyhide::NumericError& e) {
    set_error(e.what());
    return PH_ERR_NUMERIC;
  } catch (const psyhide::InfeasibleError& e) {
    set_error(e.what());
    return PH_ERR_INFEASIBLE;
  } catch (const std::exception& e) {
    set_error(e.what());
    return PH_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return PH_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

psyhide::FrameConfig frame_config_or_defaults(int frame_len, int hop,
                                              int dft_size) {
  if (frame_len == 0 && hop == 0 && dft_size == 0) {
    return psyhide::FrameConfig::defaults();
  }
  if (frame_len <= 0 || hop <= 0 || dft_size <= 0) {
    throw psyhide::ArgumentError("frame geometry must be positive");
  }
  psyhide::FrameConfig cfg;
  cfg.frame_len = static_cast<std::size_t>(frame_len);
  cfg.hop = static_cast<std::size_t>(hop);
  cfg.dft_size = static_cast<std::size_t>(dft_size);
  cfg.window = psyhide::FrameConfig::hann_window(cfg.frame_len);
  cfg.validate();
  return cfg;
}

}  // namespace

struct ph_signal {
  psyhide::AudioSignal sig;
};

struct ph_model {
  psyhide::PhoneInventory inventory;
  psyhide::ToyAcousticModel model;
  psyhide::DecodingGraph graph;

  ph_model(psyhide::PhoneInventory inv, psyhide::ToyAcousticModel m)
      : inventory(std::move(inv)), model(std::move(m)), graph(inventory) {}
};

struct ph_thresholds {
  psyhide::ThresholdMatrix th;
};

struct ph_report {
  psyhide::AttackReport report;
};

extern "C" {

const char* ph_last_error(void) { return t_last_error.c_str(); }

const char* ph_version(void) { return "0.1.0"; }

void ph_string_free(char* s) { std::free(s); }

/* ---------------------------------------------------------------- signal */

ph_status ph_signal_read_wav(const char* path, ph_signal** out) {
  return guarded([&] {
    if (path == nullptr || out == nullptr) {
      throw psyhide::ArgumentError("null argument");
    }
    *out = new ph_signal{psyhide::read_wav(path)};
  });
}

ph_status ph_signal_write_wav(const ph_signal* sig, const char* path,
                              size_t* clipped_out) {
  return guarded([&] {
    if (sig == nullptr || path == nullptr) {
      throw psyhide::ArgumentError("null argument");
    }
    const std::size_t clipped = psyhide::write_wav(sig->sig, path);
    if (clipped_out != nullptr) *clipped_out = clipped;
  });
}

ph_status ph_signal_create(const double* samples, size_t count,
                           int sample_rate_hz, ph_signal** out) {
  return guarded([&] {
    if (samples == nullptr || out == nullptr || count == 0) {
      throw psyhide::ArgumentError("null or empty sample buffer");
    }
    if (sample_rate_hz <= 0) {
      throw psyhide::ArgumentError("sample rate must be positive");
    }
    psyhide::AudioSignal s;
    s.sample_rate_hz = sample_rate_hz;
    s.samples.assign(samples, samples + count);
    *out = new ph_signal{std::move(s)};
  });
}

size_t ph_signal_length(const ph_signal* sig) {
  return sig == nullptr ? 0 : sig->sig.samples.size();
}

int ph_signal_sample_rate(const ph_signal* sig) {
  return sig == nullptr ? 0 : sig->sig.sample_rate_hz;
}

ph_status ph_signal_samples(const ph_signal* sig, double* buffer,
                            size_t capacity) {
  return guarded([&] {
    if (sig == nullptr || buffer == nullptr) {
      throw psyhide::ArgumentError("null argument");
    }
    if (capacity < sig->sig.samples.size()) {
      throw psyhide::DimensionError("buffer too small for signal");
    }
    std::memcpy(buffer, sig->sig.samples.data(),
                sig->sig.samples.size() * sizeof(double));
  });
}

void ph_signal_free(ph_signal* sig) { delete sig; }

/* ---------------------------------------------------------------- corpus */

ph_status ph_corpus_generate(const char* out_dir, const char* lexicon_path,
                             int utterance_count, int min_words, int max_words,
                             uint64_t seed) {
  return guarded([&] {
    if (out_dir == nullptr) {
      throw psyhide::ArgumentError("null corpus directory");
    }
    const psyhide::PhoneInventory inv = psyhide::builtin_inventory();
    const auto corpus = psyhide::make_synthetic_corpus(
        inv, {}, utterance_count, min_words, max_words, seed);
    psyhide::write_corpus_dir(corpus, out_dir);
    if (lexicon_path != nullptr) {
      inv.write_lexicon_file(lexicon_path);
    }
  });
}

/* ----------------------------------------------------------------- model */

void ph_train_config_defaults(ph_train_config* cfg) {
  if (cfg == nullptr) return;
  const psyhide::TrainOptions d;
  cfg->epochs = d.epochs;
  cfg->learning_rate = d.learning_rate;
  cfg->momentum = d.momentum;
  cfg->batch_utterances = d.batch_utterances;
  cfg->holdout_fraction = d.holdout_fraction;
  cfg->seed = d.seed;
  cfg->realign = d.realign ? 1 : 0;
}

ph_status ph_model_train(const char* corpus_dir, const char* lexicon_path,
                         const ph_train_config* cfg, ph_model** out,
                         double* holdout_accuracy_out) {
  return guarded([&] {
    if (corpus_dir == nullptr || lexicon_path == nullptr || out == nullptr) {
      throw psyhide::ArgumentError("null argument");
    }
    psyhide::PhoneInventory inv =
        psyhide::PhoneInventory::parse_lexicon_file(lexicon_path);
    const auto corpus = psyhide::read_corpus_dir(corpus_dir);

    psyhide::TrainOptions opts;
    if (cfg != nullptr) {
      opts.epochs = cfg->epochs;
      opts.learning_rate = cfg->learning_rate;
      opts.momentum = cfg->momentum;
      if (cfg->batch_utterances < 1) {
        throw psyhide::ArgumentError("batch size must be positive");
      }
      opts.batch_utterances = cfg->batch_utterances;
      opts.holdout_fraction = cfg->holdout_fraction;
      opts.seed = cfg->seed;
      opts.realign = cfg->realign != 0;
    }

    const psyhide::FrameConfig frame = psyhide::FrameConfig::defaults();
    psyhide::ToyAcousticModel model = psyhide::ToyAcousticModel::random_init(
        static_cast<int>(frame.dft_size), 2, {48, 32}, inv.state_count(),
        opts.seed);
    const psyhide::TrainResult res =
        psyhide::train_toy(model, corpus, inv, frame, opts);
    if (holdout_accuracy_out != nullptr) {
      *holdout_accuracy_out = res.holdout_frame_accuracy;
    }
    *out = new ph_model(std::move(inv), std::move(model));
  });
}

ph_status ph_model_save(const ph_model* model, const char* checkpoint_path) {
  return guarded([&] {
    if (model == nullptr || checkpoint_path == nullptr) {
      throw psyhide::ArgumentError("null argument");
    }
    model->model.save(checkpoint_path, model->inventory);
  });
}

ph_status ph_model_load(const char* checkpoint_path, const char* lexicon_path,
                        ph_model** out) {
  return guarded([&] {
    if (checkpoint_path == nullptr || lexicon_path == nullptr ||
        out == nullptr) {
      throw psyhide::ArgumentError("null argument");
    }
    psyhide::PhoneInventory inv =
        psyhide::PhoneInventory::parse_lexicon_file(lexicon_path);
    psyhide::ToyAcousticModel model =
        psyhide::ToyAcousticModel::load(checkpoint_path, inv);
    *out = new ph_model(std::move(inv), std::move(model));
  });
}

ph_status ph_model_decode(const ph_model* model, const ph_signal* sig,
                          char** transcript_out) {
  return guarded([&] {
    if (model == nullptr || sig == nullptr || transcript_out == nullptr) {
      throw psyhide::ArgumentError("null argument");
    }
    const psyhide::FrameConfig frame = psyhide::FrameConfig::defaults();
    const auto pre = psyhide::forward_preprocess(sig->sig, frame);
    const auto words =
        psyhide::viterbi_decode(model->model.forward(pre.features),
                                model->graph);
    *transcript_out = dup_string(psyhide::join_words(words));
  });
}

int ph_model_state_count(const ph_model* model) {
  return model == nullptr ? 0 : model->model.state_count();
}

void ph_model_free(ph_model* model) { delete model; }

ph_status ph_dump_features(const ph_signal* sig, int frame_len, int hop,
                           int dft_size, const char* features_csv,
                           const char* power_csv) {
  return guarded([&] {
    if (sig == nullptr || (features_csv == nullptr && power_csv == nullptr)) {
      throw psyhide::ArgumentError("null argument");
    }
    const psyhide::FrameConfig cfg =
        frame_config_or_defaults(frame_len, hop, dft_size);
    const auto pre = psyhide::forward_preprocess(sig->sig, cfg);
    if (features_csv != nullptr) {
      psyhide::write_csv(pre.features, features_csv);
    }
    if (power_csv != nullptr) {
      psyhide::write_csv(pre.grid.power, power_csv);
    }
  });
}

/* ------------------------------------------------------------ thresholds */

ph_status ph_thresholds_compute(const ph_signal* sig, int frame_len, int hop,
                                int dft_size, ph_thresholds** out) {
  return guarded([&] {
    if (sig == nullptr || out == nullptr) {
      throw psyhide::ArgumentError("null argument");
    }
    const psyhide::FrameConfig cfg =
        frame_config_or_defaults(frame_len, hop, dft_size);
    *out = new ph_thresholds{psyhide::compute_thresholds(sig->sig, cfg)};
  });
}

size_t ph_thresholds_frames(const ph_thresholds* th) {
  return th == nullptr ? 0 : th->th.h_db.rows();
}

size_t ph_thresholds_bins(const ph_thresholds* th) {
  return th == nullptr ? 0 : th->th.h_db.cols();
}

double ph_thresholds_at(const ph_thresholds* th, size_t frame, size_t bin) {
  if (th == nullptr || frame >= th->th.h_db.rows() ||
      bin >= th->th.h_db.cols()) {
    return 0.0;
  }
  return th->th.h_db.at(frame, bin);
}

ph_status ph_thresholds_write_csv(const ph_thresholds* th, const char* path) {
  return guarded([&] {
    if (th == nullptr || path == nullptr) {
      throw psyhide::ArgumentError("null argument");
    }
    psyhide::write_csv(th->th.h_db, path);
  });
}

void ph_thresholds_free(ph_thresholds* th) { delete th; }

/* ---------------------------------------------------------------- attack */

void ph_attack_config_defaults(ph_attack_config* cfg) {
  if (cfg == nullptr) return;
  const psyhide::AttackConfig d;
  cfg->lambda_db = d.lambda_db;
  cfg->learning_rate = d.learning_rate;
  cfg->max_iterations = d.max_iterations;
  cfg->check_every = d.check_every;
  cfg->use_thresholds = d.use_thresholds ? 1 : 0;
  cfg->use_forced_alignment = d.use_forced_alignment ? 1 : 0;
  cfg->seed = d.seed;
  cfg->realign_every = d.realign_every;
  cfg->phone_rate_limit = d.phone_rate_limit;
  cfg->dump_spectra_dir = nullptr;
}

ph_status ph_attack_run(const ph_signal* original, const char* target_words,
                        const ph_model* model, const ph_attack_config* cfg,
                        ph_signal** adversarial_out, ph_report** report_out) {
  return guarded([&] {
    if (original == nullptr || target_words == nullptr || model == nullptr ||
        adversarial_out == nullptr || report_out == nullptr) {
      throw psyhide::ArgumentError("null argument");
    }
    psyhide::AttackConfig acfg;
    if (cfg != nullptr) {
      acfg.lambda_db = cfg->lambda_db;
      acfg.learning_rate = cfg->learning_rate;
      acfg.max_iterations = cfg->max_iterations;
      acfg.check_every = cfg->check_every;
      acfg.use_thresholds = cfg->use_thresholds != 0;
      acfg.use_forced_alignment = cfg->use_forced_alignment != 0;
      acfg.seed = cfg->seed;
      acfg.realign_every = cfg->realign_every;
      acfg.phone_rate_limit = cfg->phone_rate_limit;
      if (cfg->dump_spectra_dir != nullptr) {
        acfg.dump_spectra_dir = cfg->dump_spectra_dir;
      }
    }
    const auto target = psyhide::tokenize_words(target_words);
    psyhide::AttackResult res = psyhide::run_attack(
        original->sig, target, model->model, model->graph, acfg);
    *adversarial_out = new ph_signal{std::move(res.adversarial)};
    *report_out = new ph_report{std::move(res.report)};
  });
}

int ph_report_success(const ph_report* rep) {
  return rep != nullptr && rep->report.success ? 1 : 0;
}

int ph_report_iterations(const ph_report* rep) {
  return rep == nullptr ? 0 : rep->report.iterations_used;
}

double ph_report_initial_wer(const ph_report* rep) {
  return rep == nullptr ? 0.0 : rep->report.initial_wer;
}

double ph_report_final_wer(const ph_report* rep) {
  return rep == nullptr ? 0.0 : rep->report.final_wer;
}

double ph_report_phi_db(const ph_report* rep) {
  return rep == nullptr ? 0.0 : rep->report.phi_db;
}

double ph_report_snr_db(const ph_report* rep) {
  return rep == nullptr ? 0.0 : rep->report.snr_db;
}

double ph_report_phone_rate(const ph_report* rep) {
  return rep == nullptr ? 0.0 : rep->report.phone_rate;
}

const char* ph_report_alignment_source(const ph_report* rep) {
  return rep == nullptr ? "" : rep->report.alignment_source.c_str();
}

const char* ph_report_decoded(const ph_report* rep) {
  return rep == nullptr ? "" : rep->report.decoded_transcript.c_str();
}

ph_status ph_report_to_json(const ph_report* rep, char** json_out) {
  return guarded([&] {
    if (rep == nullptr || json_out == nullptr) {
      throw psyhide::ArgumentError("null argument");
    }
    *json_out = dup_string(rep->report.to_json());
  });
}

void ph_report_free(ph_report* rep) { delete rep; }

/* --------------------------------------------------------------- metrics */

ph_status ph_wer(const char* reference, const char* hypothesis,
                 ph_wer_breakdown* out) {
  return guarded([&] {
    if (reference == nullptr || hypothesis == nullptr || out == nullptr) {
      throw psyhide::ArgumentError("null argument");
    }
    const psyhide::WerBreakdown w = psyhide::wer(
        psyhide::tokenize_words(reference), psyhide::tokenize_words(hypothesis));
    out->deletions = w.deletions;
    out->insertions = w.insertions;
    out->substitutions = w.substitutions;
    out->reference_length = w.reference_length;
    out->wer = w.wer;
  });
}

ph_status ph_snr_db(const ph_signal* original, const ph_signal* modified,
                    double* out) {
  return guarded([&] {
    if (original == nullptr || modified == nullptr || out == nullptr) {
      throw psyhide::ArgumentError("null argument");
    }
    *out = psyhide::snr_db(original->sig, modified->sig);
  });
}

} /* extern "C" */
