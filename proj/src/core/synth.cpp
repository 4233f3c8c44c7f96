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

#include "core/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "core/errors.hpp"

namespace psyhide {

namespace {

struct Formants {
  double f1;
  double f2;
};

// Invented two-tone signatures, one per phone; pairs are spread so that any
// two phones differ by several DFT bins in at least one formant.
const std::map<std::string, Formants>& formant_table() {
  static const std::map<std::string, Formants> table = {
      {"AA", {700, 1100}}, {"EH", {550, 1850}}, {"IY", {280, 2300}},
      {"OW", {480, 850}},  {"UW", {320, 950}},  {"B", {200, 2500}},
      {"D", {260, 3300}},  {"F", {4300, 6200}}, {"K", {1500, 3600}},
      {"L", {380, 2600}},  {"M", {220, 1300}},  {"N", {240, 1700}},
      {"P", {900, 2100}},  {"R", {430, 1250}},  {"S", {5200, 7000}},
      {"T", {3900, 4800}}, {"W", {360, 750}},   {"Z", {4700, 5500}},
  };
  return table;
}

void append_silence(std::vector<double>& samples, std::size_t n, Rng& rng,
                    double noise_amp) {
  for (std::size_t i = 0; i < n; ++i) {
    samples.push_back(noise_amp * rng.gaussian());
  }
}

void append_phone(std::vector<double>& samples, const std::string& phone,
                  std::size_t n, Rng& rng, double amp, double noise_amp) {
  auto it = formant_table().find(phone);
  if (it == formant_table().end()) {
    throw LexiconError("no synthesis signature for phone: " + phone);
  }
  const Formants f = it->second;
  const double phase1 = rng.uniform(0.0, 2.0 * M_PI);
  const double phase2 = rng.uniform(0.0, 2.0 * M_PI);
  const double fs = static_cast<double>(kCanonicalSampleRate);

  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n);  // 0..1
    // Linear glide from 85% to 115% of the nominal formants; warp is the
    // integral of the instantaneous frequency factor 0.85 + 0.3 t / dur.
    // The sweep is what makes the three HMM substates of a phone look
    // different to the classifier.
    const double t = static_cast<double>(i) / fs;
    const double dur = static_cast<double>(n) / fs;
    const double warp = 0.85 * t + 0.15 * t * t / dur;
    // Raised-cosine edges over the first and last 12 ms stop clicks.
    const double edge = 0.012 * fs;
    double env = 1.0;
    if (static_cast<double>(i) < edge) {
      env = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(i) / edge);
    } else if (static_cast<double>(n - 1 - i) < edge) {
      env = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(n - 1 - i) / edge);
    }
    // Downward tilt across the phone: substates differ in level too.
    env *= 1.0 - 0.4 * u;
    const double s = env * amp *
                         (0.6 * std::sin(2.0 * M_PI * f.f1 * warp + phase1) +
                          0.4 * std::sin(2.0 * M_PI * f.f2 * warp + phase2)) +
                     noise_amp * rng.gaussian();
    samples.push_back(s);
  }
}

}  // namespace

AudioSignal synthesize_utterance(const PhoneInventory& inv,
                                 const std::vector<std::string>& words,
                                 Rng& rng) {
  if (words.empty()) {
    throw ArgumentError("cannot synthesize an empty word sequence");
  }
  const double fs = static_cast<double>(kCanonicalSampleRate);
  // Levels are deliberately healthy: a quiet carrier would shrink |X| and
  // blow up the attack gradient that divides by the spectral magnitude.
  const double noise_amp = 0.012;
  const double amp = rng.uniform(0.45, 0.65);

  AudioSignal sig;
  sig.sample_rate_hz = kCanonicalSampleRate;
  auto sil_len = [&rng, fs]() {
    return static_cast<std::size_t>(rng.uniform(0.11, 0.18) * fs);
  };
  auto phone_len = [&rng, fs]() {
    return static_cast<std::size_t>(rng.uniform(0.09, 0.14) * fs);
  };

  append_silence(sig.samples, sil_len(), rng, noise_amp);
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w > 0) append_silence(sig.samples, sil_len(), rng, noise_amp);
    for (const std::string& phone : inv.word_phones(words[w])) {
      append_phone(sig.samples, phone, phone_len(), rng, amp, noise_amp);
    }
  }
  append_silence(sig.samples, sil_len(), rng, noise_amp);
  return sig;
}

std::vector<LabeledUtterance> make_synthetic_corpus(
    const PhoneInventory& inv, const std::vector<std::string>& pool,
    int utterance_count, int min_words, int max_words, std::uint64_t seed) {
  if (utterance_count <= 0) {
    throw ArgumentError("utterance count must be positive");
  }
  if (min_words < 1 || max_words < min_words) {
    throw ArgumentError("invalid words-per-utterance range");
  }
  const std::vector<std::string>& words =
      pool.empty() ? inv.words() : pool;
  for (const std::string& w : words) {
    if (!inv.has_word(w)) {
      throw LexiconError("word not in lexicon: " + w);
    }
  }

  Rng master(seed);
  std::vector<LabeledUtterance> corpus;
  corpus.reserve(utterance_count);
  for (int i = 0; i < utterance_count; ++i) {
    Rng rng = master.fork(static_cast<std::uint64_t>(i));
    LabeledUtterance utt;
    char id[32];
    std::snprintf(id, sizeof(id), "utt%04d", i);
    utt.id = id;
    const int count = rng.uniform_int(min_words, max_words);
    for (int k = 0; k < count; ++k) {
      utt.words.push_back(
          words[rng.uniform_index(words.size())]);
    }
    utt.audio = synthesize_utterance(inv, utt.words, rng);
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

void write_corpus_dir(const std::vector<LabeledUtterance>& corpus,
                      const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory: " + dir);
  }
  std::ofstream text(dir + "/transcripts.txt");
  if (!text) {
    throw IoError("cannot write transcripts in: " + dir);
  }
  for (const LabeledUtterance& utt : corpus) {
    write_wav(utt.audio, dir + "/" + utt.id + ".wav");
    text << utt.id << ' ' << join_words(utt.words) << '\n';
  }
}

std::vector<LabeledUtterance> read_corpus_dir(const std::string& dir) {
  std::ifstream text(dir + "/transcripts.txt");
  if (!text) {
    throw IoError("missing transcripts.txt in: " + dir);
  }
  std::vector<LabeledUtterance> corpus;
  std::string line;
  while (std::getline(text, line)) {
    std::istringstream ls(line);
    std::string id;
    if (!(ls >> id)) continue;
    LabeledUtterance utt;
    utt.id = id;
    std::string w;
    while (ls >> w) utt.words.push_back(w);
    if (utt.words.empty()) {
      throw FormatError("transcript without words: " + id);
    }
    utt.audio = read_wav(dir + "/" + id + ".wav");
    corpus.push_back(std::move(utt));
  }
  if (corpus.empty()) {
    throw ArgumentError("corpus is empty: " + dir);
  }
  return corpus;
}

}  // namespace psyhide
