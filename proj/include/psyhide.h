/* Copyright 2026 The psyhide Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Public C interface of libpsyhide.
 *
 * The library embeds a chosen transcription into an audio signal by
 * gradient descent through the recognizer's preprocessing, constrained by
 * psychoacoustic hearing thresholds.  It ships with a small trainable
 * acoustic model and a synthetic corpus generator so it runs end to end
 * without external data.
 *
 * Every function returns PH_OK or an error code; ph_last_error() describes
 * the most recent failure on the calling thread.  All handles are opaque
 * and freed with their matching *_free function.
 */

#ifndef PSYHIDE_H_
#define PSYHIDE_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ph_status {
  PH_OK = 0,
  PH_ERR_IO = 1,         /* file missing / unreadable / unwritable */
  PH_ERR_FORMAT = 2,     /* file exists but content is unsupported */
  PH_ERR_ARGUMENT = 3,   /* invalid parameter or degenerate input */
  PH_ERR_DIMENSION = 4,  /* shape mismatch or input too short */
  PH_ERR_LEXICON = 5,    /* unknown word/phone or inventory mismatch */
  PH_ERR_NUMERIC = 6,    /* NaN or numeric domain failure */
  PH_ERR_INFEASIBLE = 7, /* request violates a constraint (phone rate) */
  PH_ERR_INTERNAL = 8
} ph_status;

/* Thread-local message for the last failing call on this thread. */
const char* ph_last_error(void);

const char* ph_version(void);

/* Frees strings returned through char** out-parameters. */
void ph_string_free(char* s);

/* -------------------------------------------------------------- signals */

typedef struct ph_signal ph_signal;

/* 16 kHz mono; stereo WAV input is downmixed, other rates are rejected. */
ph_status ph_signal_read_wav(const char* path, ph_signal** out);
ph_status ph_signal_write_wav(const ph_signal* sig, const char* path,
                              size_t* clipped_out /* nullable */);
ph_status ph_signal_create(const double* samples, size_t count,
                           int sample_rate_hz, ph_signal** out);
size_t ph_signal_length(const ph_signal* sig);
int ph_signal_sample_rate(const ph_signal* sig);
ph_status ph_signal_samples(const ph_signal* sig, double* buffer,
                            size_t capacity);
void ph_signal_free(ph_signal* sig);

/* --------------------------------------------------------------- corpus */

/* Writes <id>.wav files plus transcripts.txt and a lexicon file for the
 * bundled toy command vocabulary.  Deterministic for a given seed. */
ph_status ph_corpus_generate(const char* out_dir, const char* lexicon_path,
                             int utterance_count, int min_words, int max_words,
                             uint64_t seed);

/* ---------------------------------------------------------------- model */

typedef struct ph_model ph_model;

typedef struct ph_train_config {
  int epochs;              /* per training round */
  double learning_rate;
  double momentum;
  int batch_utterances;    /* utterances per gradient update */
  double holdout_fraction;
  uint64_t seed;
  int realign;             /* nonzero: second round on forced alignment */
} ph_train_config;

void ph_train_config_defaults(ph_train_config* cfg);

/* Trains the toy acoustic model on a corpus directory (as written by
 * ph_corpus_generate): equal-alignment round, forced realignment, second
 * round.  Reports held-out frame accuracy. */
ph_status ph_model_train(const char* corpus_dir, const char* lexicon_path,
                         const ph_train_config* cfg, ph_model** out,
                         double* holdout_accuracy_out /* nullable */);

ph_status ph_model_save(const ph_model* model, const char* checkpoint_path);
ph_status ph_model_load(const char* checkpoint_path, const char* lexicon_path,
                        ph_model** out);

/* Viterbi decode over the word-loop graph; *transcript_out is malloc'd. */
ph_status ph_model_decode(const ph_model* model, const ph_signal* sig,
                          char** transcript_out);

int ph_model_state_count(const ph_model* model);
void ph_model_free(ph_model* model);

/* Debug dump of the preprocessing: log-power features and/or squared
 * magnitudes as CSV, one row per frame (either path may be NULL). */
ph_status ph_dump_features(const ph_signal* sig, int frame_len, int hop,
                           int dft_size, const char* features_csv,
                           const char* power_csv);

/* ----------------------------------------------------------- thresholds */

typedef struct ph_thresholds ph_thresholds;

/* Hearing thresholds of a signal on the frame grid of the given analysis
 * geometry (pass 0/0/0 for the 400/160/512 defaults). */
ph_status ph_thresholds_compute(const ph_signal* sig, int frame_len, int hop,
                                int dft_size, ph_thresholds** out);
size_t ph_thresholds_frames(const ph_thresholds* th);
size_t ph_thresholds_bins(const ph_thresholds* th);
double ph_thresholds_at(const ph_thresholds* th, size_t frame, size_t bin);
ph_status ph_thresholds_write_csv(const ph_thresholds* th, const char* path);
void ph_thresholds_free(ph_thresholds* th);

/* --------------------------------------------------------------- attack */

typedef struct ph_report ph_report;

typedef struct ph_attack_config {
  double lambda_db;        /* allowed dB excess above the thresholds */
  double learning_rate;
  int max_iterations;
  int check_every;         /* decode cadence in iterations */
  int use_thresholds;      /* nonzero: mask the spectral gradient */
  int use_forced_alignment;
  uint64_t seed;           /* echoed into the report */
  int realign_every;       /* 0: align once at the start */
  double phone_rate_limit; /* phones per second */
  const char* dump_spectra_dir; /* nullable: CSV dumps of |S|,|M|,|D|,H */
} ph_attack_config;

void ph_attack_config_defaults(ph_attack_config* cfg);

/* Embeds target_words (whitespace separated) into `original`.  On success
 * *adversarial_out holds the perturbed signal and *report_out the run
 * record; both are owned by the caller. */
ph_status ph_attack_run(const ph_signal* original, const char* target_words,
                        const ph_model* model, const ph_attack_config* cfg,
                        ph_signal** adversarial_out, ph_report** report_out);

int ph_report_success(const ph_report* rep);
int ph_report_iterations(const ph_report* rep);
double ph_report_initial_wer(const ph_report* rep);
double ph_report_final_wer(const ph_report* rep);
double ph_report_phi_db(const ph_report* rep);
double ph_report_snr_db(const ph_report* rep); /* +inf for zero noise */
double ph_report_phone_rate(const ph_report* rep);
const char* ph_report_alignment_source(const ph_report* rep);
const char* ph_report_decoded(const ph_report* rep);
ph_status ph_report_to_json(const ph_report* rep, char** json_out);
void ph_report_free(ph_report* rep);

/* -------------------------------------------------------------- metrics */

typedef struct ph_wer_breakdown {
  int deletions;
  int insertions;
  int substitutions;
  int reference_length;
  double wer;
} ph_wer_breakdown;

/* Word error rate between two whitespace-separated transcripts (uppercase
 * fold, punctuation stripped). */
ph_status ph_wer(const char* reference, const char* hypothesis,
                 ph_wer_breakdown* out);

ph_status ph_snr_db(const ph_signal* original, const ph_signal* modified,
                    double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PSYHIDE_H_ */
