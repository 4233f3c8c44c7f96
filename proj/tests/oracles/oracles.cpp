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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace psyhide::oracle {

std::vector<std::complex<double>> naive_dft(const std::vector<double>& frame,
                                            std::size_t dft_size) {
  std::vector<std::complex<double>> out(dft_size);
  for (std::size_t k = 0; k < dft_size; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t n = 0; n < frame.size(); ++n) {
      const double ang = -2.0 * M_PI * static_cast<double>(k) *
                         static_cast<double>(n) / static_cast<double>(dft_size);
      acc += frame[n] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

Matrix naive_forward_features(const AudioSignal& x, const FrameConfig& cfg) {
  const std::size_t frames = 1 + (x.samples.size() - cfg.frame_len) / cfg.hop;
  Matrix features(frames, cfg.dft_size);
  for (std::size_t t = 0; t < frames; ++t) {
    std::vector<double> windowed(cfg.frame_len);
    for (std::size_t n = 0; n < cfg.frame_len; ++n) {
      windowed[n] = x.samples[t * cfg.hop + n] * cfg.window[n];
    }
    const auto spectrum = naive_dft(windowed, cfg.dft_size);
    for (std::size_t k = 0; k < cfg.dft_size; ++k) {
      features.at(t, k) = std::log(std::norm(spectrum[k]) + kLogEpsilon);
    }
  }
  return features;
}

std::vector<double> central_difference(
    const std::function<double(const AudioSignal&)>& f, const AudioSignal& x,
    double step) {
  std::vector<double> grad(x.samples.size());
  AudioSignal probe = x;
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    const double saved = probe.samples[i];
    probe.samples[i] = saved + step;
    const double up = f(probe);
    probe.samples[i] = saved - step;
    const double down = f(probe);
    probe.samples[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double relative_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    num += d * d;
    den += b[i] * b[i];
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

int edit_distance(const std::vector<std::string>& ref,
                  const std::vector<std::string>& hyp) {
  // Two-row recurrence over suffixes, i.e. running from the back; the
  // library's implementation works on prefixes with a full matrix.
  const std::size_t m = ref.size();
  const std::size_t n = hyp.size();
  std::vector<int> next(n + 1);
  std::vector<int> cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) next[j] = static_cast<int>(n - j);
  for (std::size_t i = m; i-- > 0;) {
    cur[n] = static_cast<int>(m - i);
    for (std::size_t j = n; j-- > 0;) {
      if (ref[i] == hyp[j]) {
        cur[j] = next[j + 1];
      } else {
        cur[j] = 1 + std::min({next[j + 1], next[j], cur[j + 1]});
      }
    }
    std::swap(cur, next);
  }
  return next[0];
}

int edit_distance_slow(const std::vector<std::string>& ref,
                       const std::vector<std::string>& hyp) {
  if (ref.empty()) return static_cast<int>(hyp.size());
  if (hyp.empty()) return static_cast<int>(ref.size());
  std::vector<std::string> r(ref.begin() + 1, ref.end());
  std::vector<std::string> h(hyp.begin() + 1, hyp.end());
  if (ref.front() == hyp.front()) return edit_distance_slow(r, h);
  const int sub = edit_distance_slow(r, h);
  const int del = edit_distance_slow(r, hyp);
  const int ins = edit_distance_slow(ref, h);
  return 1 + std::min({sub, del, ins});
}

namespace {

void enumerate_monotone(const Matrix& posteriors,
                        const std::vector<int>& chain, std::size_t t,
                        std::size_t j, double score, std::vector<int>& states,
                        MonotonePath& best) {
  const std::size_t frames = posteriors.rows();
  const std::size_t m = chain.size();
  // Remaining frames must still be able to reach the last chain state.
  if (m - 1 - j > frames - t) return;
  score += std::log(std::max(
      posteriors.at(t, static_cast<std::size_t>(chain[j])), 1e-300));
  states.push_back(chain[j]);
  if (t + 1 == frames) {
    if (j + 1 == m && score >= best.score) {
      // >= keeps the path found latest, i.e. with the latest transitions,
      // when scores tie exactly.
      best.score = score;
      best.states = states;
    }
  } else {
    enumerate_monotone(posteriors, chain, t + 1, j, score, states, best);
    if (j + 1 < m) {
      enumerate_monotone(posteriors, chain, t + 1, j + 1, score, states, best);
    }
  }
  states.pop_back();
}

}  // namespace

MonotonePath best_monotone_path(const Matrix& posteriors,
                                const std::vector<int>& chain) {
  MonotonePath best;
  best.score = -std::numeric_limits<double>::infinity();
  std::vector<int> states;
  enumerate_monotone(posteriors, chain, 0, 0, 0.0, states, best);
  return best;
}

namespace {

struct GraphEnumState {
  std::vector<std::vector<int>> successors;
  GraphPath best;
  double second_best = -std::numeric_limits<double>::infinity();
};

void enumerate_graph(const Matrix& posteriors, const DecodingGraph& graph,
                     GraphEnumState& st, std::size_t t, int node, double score,
                     std::vector<int>& path) {
  score += std::log(std::max(
      posteriors.at(t, static_cast<std::size_t>(graph.emit_state(node))),
      1e-300));
  path.push_back(node);
  if (t + 1 == posteriors.rows()) {
    if (score > st.best.score) {
      st.second_best = st.best.score;
      st.best.score = score;
      st.best.words = graph.collapse_path(path);
    } else if (score > st.second_best) {
      st.second_best = score;
    }
  } else {
    for (int next : st.successors[node]) {
      enumerate_graph(posteriors, graph, st, t + 1, next, score, path);
    }
  }
  path.pop_back();
}

}  // namespace

GraphPath best_graph_path(const Matrix& posteriors,
                          const DecodingGraph& graph) {
  GraphEnumState st;
  st.successors.resize(graph.node_count());
  for (std::size_t node = 0; node < graph.node_count(); ++node) {
    for (int pred : graph.predecessors(node)) {
      st.successors[pred].push_back(static_cast<int>(node));
    }
  }
  st.best.score = -std::numeric_limits<double>::infinity();

  std::vector<int> path;
  for (std::size_t node = 0; node < graph.node_count(); ++node) {
    if (graph.is_chain_start(node)) {
      enumerate_graph(posteriors, graph, st, 0, static_cast<int>(node), 0.0,
                      path);
    }
  }
  st.best.unique = st.best.score - st.second_best > 1e-9;
  return st.best;
}

}  // namespace psyhide::oracle
