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

#include "core/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace psyhide {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_posterior(const Matrix& posteriors, std::size_t t, int state) {
  // Softmax outputs can underflow to zero; keep the score finite so the
  // dynamic programs stay well ordered.
  return std::log(std::max(posteriors.at(t, static_cast<std::size_t>(state)),
                           1e-300));
}

}  // namespace

DecodingGraph::DecodingGraph(const PhoneInventory& inventory)
    : inventory_(inventory) {
  auto add_chain = [this](const std::vector<int>& chain, int word_index) {
    for (std::size_t i = 0; i < chain.size(); ++i) {
      emit_.push_back(chain[i]);
      word_.push_back(word_index);
      chain_start_.push_back(i == 0);
      chain_end_.push_back(i + 1 == chain.size());
      preds_.emplace_back();
      const int node = static_cast<int>(emit_.size()) - 1;
      preds_[node].push_back(node);  // self-loop
      if (i > 0) preds_[node].push_back(node - 1);
    }
  };

  std::vector<int> silence_chain;
  for (int s = 0; s < inventory_.states_per_phone(); ++s) {
    silence_chain.push_back(inventory_.silence_state(s));
  }
  add_chain(silence_chain, -1);
  for (std::size_t w = 0; w < inventory_.words().size(); ++w) {
    add_chain(inventory_.word_state_chain(inventory_.words()[w]),
              static_cast<int>(w));
  }

  // Word loop: every chain end feeds every chain start.
  for (std::size_t end = 0; end < node_count(); ++end) {
    if (!chain_end_[end]) continue;
    for (std::size_t start = 0; start < node_count(); ++start) {
      if (!chain_start_[start]) continue;
      if (start == end) continue;  // already present as the self-loop
      preds_[start].push_back(static_cast<int>(end));
    }
  }
  for (auto& p : preds_) std::sort(p.begin(), p.end());
}

std::vector<int> DecodingGraph::expanded_target_chain(
    const std::vector<std::string>& target_words) const {
  if (target_words.empty()) {
    throw ArgumentError("target word sequence is empty");
  }
  std::vector<int> chain;
  auto push_silence = [this, &chain]() {
    for (int s = 0; s < inventory_.states_per_phone(); ++s) {
      chain.push_back(inventory_.silence_state(s));
    }
  };
  push_silence();
  for (const std::string& w : target_words) {
    const std::vector<int> wc = inventory_.word_state_chain(w);
    chain.insert(chain.end(), wc.begin(), wc.end());
    push_silence();
  }
  return chain;
}

std::vector<std::string> DecodingGraph::collapse_path(
    const std::vector<int>& nodes) const {
  std::vector<std::string> words;
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    const int node = nodes[t];
    if (!chain_end_[node] || word_[node] < 0) continue;
    const bool leaves =
        t + 1 == nodes.size() || nodes[t + 1] != node;
    if (leaves) words.push_back(word_name(word_[node]));
  }
  return words;
}

StateAlignment equal_align(const std::vector<std::string>& target_words,
                           std::size_t frames, const DecodingGraph& graph) {
  if (frames < 1) {
    throw ArgumentError("equal alignment needs at least one frame");
  }
  const std::vector<int> chain = graph.expanded_target_chain(target_words);
  const std::size_t m = chain.size();
  if (m > frames) {
    throw InfeasibleError(
        "target chain (" + std::to_string(m) + " states) longer than signal (" +
        std::to_string(frames) +
        " frames); zero-length state blocks would truncate the chain");
  }
  const std::size_t base = frames / m;
  const std::size_t rem = frames % m;

  StateAlignment out;
  out.source = StateAlignment::Source::kEqual;
  out.states.reserve(frames);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t block = base + (j < rem ? 1 : 0);
    for (std::size_t i = 0; i < block; ++i) out.states.push_back(chain[j]);
  }
  return out;
}

StateAlignment forced_align(const Matrix& posteriors,
                            const std::vector<std::string>& target_words,
                            const DecodingGraph& graph) {
  const std::size_t frames = posteriors.rows();
  const std::vector<int> chain = graph.expanded_target_chain(target_words);
  const std::size_t m = chain.size();

  if (frames < m) {
    StateAlignment fallback = equal_align(target_words, frames, graph);
    fallback.fallback_warning = true;
    return fallback;
  }

  // score(t, j): best monotone path ending in chain state j at frame t.
  Matrix score(frames, m, kNegInf);
  std::vector<std::vector<unsigned char>> stayed(
      frames, std::vector<unsigned char>(m, 1));

  score.at(0, 0) = log_posterior(posteriors, 0, chain[0]);
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t j = 0; j < m; ++j) {
      const double stay = score.at(t - 1, j);
      const double advance = j > 0 ? score.at(t - 1, j - 1) : kNegInf;
      // Ties keep the walker in its current state as long as possible, so
      // the predecessor of a tie is the advancing one: transitions land as
      // late as they can.
      const bool take_stay = stay > advance;
      const double best = take_stay ? stay : advance;
      if (best == kNegInf) continue;
      score.at(t, j) = best + log_posterior(posteriors, t, chain[j]);
      stayed[t][j] = take_stay ? 1 : 0;
    }
  }

  StateAlignment out;
  out.source = StateAlignment::Source::kForced;
  out.states.assign(frames, 0);
  std::size_t j = m - 1;
  for (std::size_t t = frames; t-- > 0;) {
    out.states[t] = chain[j];
    if (t > 0 && !stayed[t][j]) --j;
  }
  return out;
}

double alignment_score(const Matrix& posteriors, const StateAlignment& a) {
  if (posteriors.rows() != a.frames()) {
    throw DimensionError("alignment length does not match posteriors");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < a.frames(); ++t) {
    total += log_posterior(posteriors, t, a.states[t]);
  }
  return total;
}

std::vector<std::string> viterbi_decode(const Matrix& posteriors,
                                        const DecodingGraph& graph) {
  const std::size_t frames = posteriors.rows();
  if (frames < 1) {
    throw ArgumentError("cannot decode an empty posterior matrix");
  }
  if (posteriors.cols() <
      static_cast<std::size_t>(graph.inventory().state_count())) {
    throw DimensionError("posterior columns do not cover the state set");
  }
  const std::size_t nodes = graph.node_count();

  Matrix score(frames, nodes, kNegInf);
  std::vector<std::vector<int>> back(frames, std::vector<int>(nodes, -1));

  for (std::size_t s = 0; s < nodes; ++s) {
    if (graph.is_chain_start(s)) {
      score.at(0, s) = log_posterior(posteriors, 0, graph.emit_state(s));
    }
  }
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t s = 0; s < nodes; ++s) {
      double best = kNegInf;
      int best_pred = -1;
      // Predecessor lists are sorted, so ties resolve to the lowest id.
      for (int p : graph.predecessors(s)) {
        const double v = score.at(t - 1, static_cast<std::size_t>(p));
        if (v > best) {
          best = v;
          best_pred = p;
        }
      }
      if (best_pred < 0 || best == kNegInf) continue;
      score.at(t, s) = best + log_posterior(posteriors, t, graph.emit_state(s));
      back[t][s] = best_pred;
    }
  }

  std::size_t final_node = 0;
  double final_best = kNegInf;
  for (std::size_t s = 0; s < nodes; ++s) {
    if (score.at(frames - 1, s) > final_best) {
      final_best = score.at(frames - 1, s);
      final_node = s;
    }
  }

  std::vector<int> path(frames, 0);
  path[frames - 1] = static_cast<int>(final_node);
  for (std::size_t t = frames - 1; t > 0; --t) {
    path[t - 1] = back[t][path[t]];
  }
  return graph.collapse_path(path);
}

PhoneRateResult phone_rate_check(const std::vector<std::string>& target_words,
                                 double duration_s, double max_rate,
                                 const PhoneInventory& inventory) {
  if (duration_s <= 0.0) {
    throw ArgumentError("duration must be positive");
  }
  if (target_words.empty()) {
    throw ArgumentError("target word sequence is empty");
  }
  const int phones = inventory.total_phones(target_words);
  if (phones == 0) {
    throw ArgumentError("target has no phones");
  }
  PhoneRateResult r;
  r.rate = static_cast<double>(phones) / duration_s;
  r.pass = r.rate <= max_rate;
  return r;
}

}  // namespace psyhide
