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

#ifndef PSYHIDE_CORE_DECODER_HPP_
#define PSYHIDE_CORE_DECODER_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "core/lexicon.hpp"
#include "core/matrix.hpp"

namespace psyhide {

// Per-frame target state ids, the result of aligning a transcription to
// frames.
struct StateAlignment {
  enum class Source { kForced, kEqual };

  std::vector<int> states;
  Source source = Source::kEqual;
  bool fallback_warning = false;  // forced alignment had to fall back

  std::size_t frames() const { return states.size(); }
};

// A word-loop over left-to-right phone-state chains with self-loops.
// Node 0..k hold the silence chain, then each lexicon word's chain in
// lexicon order.  All transitions score zero (posteriors act as the only
// evidence); any chain-start node may start a path and every node may end
// one, with words emitted on completed chains only.
class DecodingGraph {
 public:
  explicit DecodingGraph(const PhoneInventory& inventory);

  const PhoneInventory& inventory() const { return inventory_; }

  std::size_t node_count() const { return emit_.size(); }
  int emit_state(std::size_t node) const { return emit_[node]; }
  int word_of_node(std::size_t node) const { return word_[node]; }  // -1 = SIL
  bool is_chain_start(std::size_t node) const { return chain_start_[node]; }
  bool is_chain_end(std::size_t node) const { return chain_end_[node]; }
  const std::vector<int>& predecessors(std::size_t node) const {
    return preds_[node];
  }
  const std::string& word_name(int word_index) const {
    return inventory_.words()[word_index];
  }

  // SIL + word1 + SIL + word2 + ... + SIL as model state ids.
  std::vector<int> expanded_target_chain(
      const std::vector<std::string>& target_words) const;

  // Collapses a node path to the words it completes.  Shared by the
  // decoder and by the brute-force checks in the tests.
  std::vector<std::string> collapse_path(const std::vector<int>& nodes) const;

 private:
  PhoneInventory inventory_;
  std::vector<int> emit_;          // model state id per node
  std::vector<int> word_;          // word index per node, -1 for silence
  std::vector<bool> chain_start_;
  std::vector<bool> chain_end_;
  std::vector<std::vector<int>> preds_;
};

// Best monotone path of the expanded target chain through the posteriors,
// scored by log y(t, state); ties prefer staying in the current state.
// Falls back to equal division when the signal has fewer frames than the
// chain has states (and flags it); if even that is impossible the equal
// division error propagates.
StateAlignment forced_align(const Matrix& posteriors,
                            const std::vector<std::string>& target_words,
                            const DecodingGraph& graph);

// Contiguous blocks of floor(T/M) frames per chain state, the first
// T mod M blocks one frame longer.
StateAlignment equal_align(const std::vector<std::string>& target_words,
                           std::size_t frames, const DecodingGraph& graph);

// Log-probability of an alignment under the posteriors.
double alignment_score(const Matrix& posteriors, const StateAlignment& a);

// Max-probability path through the word loop, collapsed to words.
// Deterministic: score ties prefer the lowest node id.
std::vector<std::string> viterbi_decode(const Matrix& posteriors,
                                        const DecodingGraph& graph);

struct PhoneRateResult {
  double rate = 0.0;  // phones per second
  bool pass = false;
};

// Lexicon phones of the target per second of audio, gated at max_rate.
PhoneRateResult phone_rate_check(const std::vector<std::string>& target_words,
                                 double duration_s, double max_rate,
                                 const PhoneInventory& inventory);

}  // namespace psyhide

#endif  // PSYHIDE_CORE_DECODER_HPP_
