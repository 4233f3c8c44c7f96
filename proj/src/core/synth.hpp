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

#ifndef PSYHIDE_CORE_SYNTH_HPP_
#define PSYHIDE_CORE_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "core/audio_io.hpp"
#include "core/lexicon.hpp"
#include "core/rng.hpp"

namespace psyhide {

// Labeled training / evaluation utterance.
struct LabeledUtterance {
  std::string id;
  AudioSignal audio;
  std::vector<std::string> words;
};

// Renders a word sequence as formant-like tone pairs per phone over a soft
// noise floor, with leading, trailing and inter-word silence.  Each phone
// carries a small frequency glide and an attack/decay envelope so that the
// three HMM substates are acoustically distinguishable.  Deterministic for
// a given RNG state.
AudioSignal synthesize_utterance(const PhoneInventory& inv,
                                 const std::vector<std::string>& words,
                                 Rng& rng);

// Random word sequences drawn from `pool` (or the whole lexicon when pool
// is empty), `min_words` to `max_words` words each.
std::vector<LabeledUtterance> make_synthetic_corpus(
    const PhoneInventory& inv, const std::vector<std::string>& pool,
    int utterance_count, int min_words, int max_words, std::uint64_t seed);

// Corpus directory layout: <id>.wav files plus transcripts.txt with one
// "<id> WORD WORD ..." line per utterance.
void write_corpus_dir(const std::vector<LabeledUtterance>& corpus,
                      const std::string& dir);
std::vector<LabeledUtterance> read_corpus_dir(const std::string& dir);

}  // namespace psyhide

#endif  // PSYHIDE_CORE_SYNTH_HPP_
