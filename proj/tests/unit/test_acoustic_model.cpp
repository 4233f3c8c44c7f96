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

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "core/acoustic_model.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/synth.hpp"
#include "oracles.hpp"

using namespace psyhide;

namespace {

Matrix random_features(std::size_t frames, std::size_t bins,
                       std::uint64_t seed) {
  Matrix f(frames, bins);
  Rng rng(seed);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) {
      f.at(t, k) = rng.uniform(-12.0, 4.0);
    }
  }
  return f;
}

StateAlignment alignment_of(std::vector<int> states) {
  StateAlignment a;
  a.states = std::move(states);
  return a;
}

void zero_model(ToyAcousticModel& m) {
  for (DenseLayer& l : m.mutable_layers()) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
}

}  // namespace

TEST_CASE("zero weights and biases give uniform posteriors") {
  ToyAcousticModel m =
      ToyAcousticModel::random_init(16, 2, {10, 8}, 7, 1);
  zero_model(m);
  const Matrix post = m.forward(random_features(5, 16, 2));
  for (std::size_t t = 0; t < post.rows(); ++t) {
    for (std::size_t q = 0; q < post.cols(); ++q) {
      REQUIRE(post.at(t, q) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("posterior rows always sum to one") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    ToyAcousticModel m = ToyAcousticModel::random_init(24, 1, {14}, 9, seed);
    const Matrix post = m.forward(random_features(7, 24, seed * 11));
    for (std::size_t t = 0; t < post.rows(); ++t) {
      double sum = 0.0;
      for (std::size_t q = 0; q < post.cols(); ++q) {
        REQUIRE(post.at(t, q) >= 0.0);
        sum += post.at(t, q);
      }
      REQUIRE(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("a +20 logit dominates the softmax") {
  ToyAcousticModel m = ToyAcousticModel::random_init(8, 0, {}, 6, 1);
  zero_model(m);
  m.mutable_layers().back().bias[2] = 20.0;
  const Matrix post = m.forward(random_features(3, 8, 5));
  for (std::size_t t = 0; t < post.rows(); ++t) {
    REQUIRE(post.at(t, 2) > 0.999);
  }
}

TEST_CASE("cross entropy of a perfect prediction is zero") {
  Matrix post(3, 4);
  post.at(0, 1) = 1.0;
  post.at(1, 2) = 1.0;
  post.at(2, 0) = 1.0;
  const auto res = cross_entropy_loss(post, alignment_of({1, 2, 0}));
  CHECK(res.loss == 0.0);
}

TEST_CASE("cross entropy of uniform posteriors over four states is log 4") {
  Matrix post(5, 4, 0.25);
  const auto res = cross_entropy_loss(post, alignment_of({0, 1, 2, 3, 0}));
  CHECK(res.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("a zero posterior at the target is clamped, never NaN") {
  Matrix post(2, 3);
  post.at(0, 0) = 1.0;  // target row has a literal zero
  post.at(1, 1) = 1.0;
  const auto res = cross_entropy_loss(post, alignment_of({2, 1}));
  CHECK(std::isfinite(res.loss));
  CHECK(std::isfinite(res.grad.at(0, 2)));
  CHECK(res.grad.at(0, 2) < 0.0);
}

TEST_CASE("cross-entropy gradient matches finite differences") {
  Rng rng(17);
  Matrix post(4, 6);
  for (std::size_t t = 0; t < post.rows(); ++t) {
    double sum = 0.0;
    for (std::size_t q = 0; q < post.cols(); ++q) {
      post.at(t, q) = 0.05 + rng.uniform();
      sum += post.at(t, q);
    }
    for (std::size_t q = 0; q < post.cols(); ++q) post.at(t, q) /= sum;
  }
  const StateAlignment target = alignment_of({2, 0, 5, 3});
  const auto res = cross_entropy_loss(post, target);

  const double h = 1e-7;
  std::vector<double> numeric, analytic;
  for (std::size_t t = 0; t < post.rows(); ++t) {
    for (std::size_t q = 0; q < post.cols(); ++q) {
      Matrix up = post, down = post;
      up.at(t, q) += h;
      down.at(t, q) -= h;
      numeric.push_back((cross_entropy_loss(up, target).loss -
                         cross_entropy_loss(down, target).loss) /
                        (2.0 * h));
      analytic.push_back(res.grad.at(t, q));
    }
  }
  CHECK(oracle::relative_l2(analytic, numeric) < 1e-5);
}

TEST_CASE("zero posterior cotangent gives a zero feature gradient") {
  ToyAcousticModel m = ToyAcousticModel::random_init(12, 1, {8}, 5, 2);
  const Matrix features = random_features(6, 12, 3);
  const Matrix zero(6, 5);
  const Matrix grad = m.backward_features(features, zero);
  for (std::size_t t = 0; t < grad.rows(); ++t) {
    for (std::size_t k = 0; k < grad.cols(); ++k) {
      REQUIRE(grad.at(t, k) == 0.0);
    }
  }
}

TEST_CASE("identity output layer reduces backward to the softmax Jacobian") {
  // Single linear layer, weights = identity, no context, neutral input
  // normalization: posteriors = softmax(features) and the feature gradient
  // must equal y * (g - <g, y>) per row.
  const int q = 5;
  ToyAcousticModel m = ToyAcousticModel::random_init(q, 0, {}, q, 1);
  zero_model(m);
  for (int i = 0; i < q; ++i) {
    m.mutable_layers()[0].weights[i * q + i] = 1.0;
  }
  m.set_input_normalization(std::vector<double>(q, 0.0),
                            std::vector<double>(q, 1.0));

  Matrix features(2, q);
  Rng rng(9);
  for (std::size_t t = 0; t < 2; ++t) {
    for (int k = 0; k < q; ++k) features.at(t, k) = rng.uniform(-2.0, 2.0);
  }
  Matrix cotangent(2, q);
  for (std::size_t t = 0; t < 2; ++t) {
    for (int k = 0; k < q; ++k) cotangent.at(t, k) = rng.uniform(-1.0, 1.0);
  }

  const Matrix post = m.forward(features);
  const Matrix grad = m.backward_features(features, cotangent);
  for (std::size_t t = 0; t < 2; ++t) {
    double dot = 0.0;
    for (int k = 0; k < q; ++k) dot += cotangent.at(t, k) * post.at(t, k);
    for (int k = 0; k < q; ++k) {
      const double expected = post.at(t, k) * (cotangent.at(t, k) - dot);
      REQUIRE(grad.at(t, k) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("plain CE gradient through the softmax equals the combined form") {
  // With an identity output layer, pushing the explicit -1/(T y_target)
  // cotangent through the softmax Jacobian must reproduce the combined
  // (y - onehot)/T form to near machine precision.
  const int q = 6;
  ToyAcousticModel m = ToyAcousticModel::random_init(q, 0, {}, q, 2);
  zero_model(m);
  for (int i = 0; i < q; ++i) m.mutable_layers()[0].weights[i * q + i] = 1.0;
  m.set_input_normalization(std::vector<double>(q, 0.0),
                            std::vector<double>(q, 1.0));

  Matrix features(3, q);
  Rng rng(13);
  for (std::size_t t = 0; t < 3; ++t) {
    for (int k = 0; k < q; ++k) features.at(t, k) = rng.uniform(-3.0, 3.0);
  }
  const StateAlignment target = alignment_of({4, 0, 2});
  const Matrix post = m.forward(features);
  const auto ce = cross_entropy_loss(post, target);
  const Matrix grad = m.backward_features(features, ce.grad);
  for (std::size_t t = 0; t < 3; ++t) {
    for (int k = 0; k < q; ++k) {
      const double onehot = target.states[t] == k ? 1.0 : 0.0;
      const double combined = (post.at(t, k) - onehot) / 3.0;
      REQUIRE(std::abs(grad.at(t, k) - combined) <= 1e-8);
    }
  }
}

TEST_CASE("loss gradient w.r.t. features matches finite differences") {
  ToyAcousticModel m = ToyAcousticModel::random_init(10, 2, {12, 8}, 6, 4);
  const Matrix features = random_features(5, 10, 21);
  const StateAlignment target = alignment_of({0, 3, 5, 1, 2});

  const auto ce = cross_entropy_loss(m.forward(features), target);
  const Matrix analytic = m.backward_features(features, ce.grad);

  const double h = 1e-5;
  std::vector<double> av, nv;
  for (std::size_t t = 0; t < features.rows(); ++t) {
    for (std::size_t k = 0; k < features.cols(); ++k) {
      Matrix up = features, down = features;
      up.at(t, k) += h;
      down.at(t, k) -= h;
      const double fd = (cross_entropy_loss(m.forward(up), target).loss -
                         cross_entropy_loss(m.forward(down), target).loss) /
                        (2.0 * h);
      nv.push_back(fd);
      av.push_back(analytic.at(t, k));
    }
  }
  CHECK(oracle::relative_l2(av, nv) < 1e-4);
}

TEST_CASE("shape mismatches are rejected") {
  ToyAcousticModel m = ToyAcousticModel::random_init(12, 1, {8}, 5, 2);
  CHECK_THROWS_AS(m.forward(random_features(3, 11, 1)), DimensionError);
  Matrix post(3, 4, 0.25);
  CHECK_THROWS_AS(cross_entropy_loss(post, alignment_of({0, 1})),
                  DimensionError);
  CHECK_THROWS_AS(cross_entropy_loss(post, alignment_of({0, 1, 9})),
                  DimensionError);
}

// Training behavior.  The 10-word corpus keeps this test quick while still
// exercising both rounds end to end.
TEST_CASE("training on a small synthetic corpus" * doctest::timeout(600)) {
  const PhoneInventory inv = builtin_inventory();
  const std::vector<std::string> pool(inv.words().begin(),
                                      inv.words().begin() + 10);
  const auto corpus = make_synthetic_corpus(inv, pool, 70, 1, 2, 11);
  const FrameConfig cfg = FrameConfig::defaults();

  SUBCASE("zero epochs leave the model untouched") {
    ToyAcousticModel m = ToyAcousticModel::random_init(
        static_cast<int>(cfg.dft_size), 2, {48, 32}, inv.state_count(), 1);
    const auto before = m.layers();
    TrainOptions opts;
    opts.epochs = 0;
    const TrainResult res = train_toy(m, corpus, inv, cfg, opts);
    CHECK(res.epochs_run == 0);
    REQUIRE(m.layers().size() == before.size());
    for (std::size_t l = 0; l < before.size(); ++l) {
      REQUIRE(m.layers()[l].weights == before[l].weights);
      REQUIRE(m.layers()[l].bias == before[l].bias);
    }
  }

  SUBCASE("loss is non-increasing over the first epochs at a small rate") {
    ToyAcousticModel m = ToyAcousticModel::random_init(
        static_cast<int>(cfg.dft_size), 2, {48, 32}, inv.state_count(), 1);
    TrainOptions opts;
    opts.epochs = 5;
    opts.learning_rate = 0.005;
    opts.realign = false;
    const TrainResult res = train_toy(m, corpus, inv, cfg, opts);
    REQUIRE(res.epoch_losses.size() == 5);
    for (std::size_t i = 1; i < res.epoch_losses.size(); ++i) {
      REQUIRE(res.epoch_losses[i] <= res.epoch_losses[i - 1]);
    }
  }

  SUBCASE("reaches at least 80% held-out frame accuracy and is seeded") {
    ToyAcousticModel m1 = ToyAcousticModel::random_init(
        static_cast<int>(cfg.dft_size), 2, {48, 32}, inv.state_count(), 1);
    TrainOptions opts;
    opts.epochs = 12;
    opts.holdout_fraction = 0.15;
    const TrainResult r1 = train_toy(m1, corpus, inv, cfg, opts);
    CHECK(r1.holdout_frame_accuracy >= 0.80);

    ToyAcousticModel m2 = ToyAcousticModel::random_init(
        static_cast<int>(cfg.dft_size), 2, {48, 32}, inv.state_count(), 1);
    const TrainResult r2 = train_toy(m2, corpus, inv, cfg, opts);
    CHECK(r1.holdout_frame_accuracy == r2.holdout_frame_accuracy);
    for (std::size_t l = 0; l < m1.layers().size(); ++l) {
      REQUIRE(m1.layers()[l].weights == m2.layers()[l].weights);
    }

    // checkpoint round trip preserves behavior bit for bit
    const auto dir =
        std::filesystem::temp_directory_path() / "psyhide_model_test";
    std::filesystem::create_directories(dir);
    const std::string ckpt = (dir / "model.json").string();
    m1.save(ckpt, inv);
    const ToyAcousticModel loaded = ToyAcousticModel::load(ckpt, inv);
    const Matrix f = forward_preprocess(corpus[0].audio, cfg).features;
    const Matrix a = m1.forward(f);
    const Matrix b = loaded.forward(f);
    for (std::size_t t = 0; t < a.rows(); ++t) {
      for (std::size_t q = 0; q < a.cols(); ++q) {
        REQUIRE(a.at(t, q) == b.at(t, q));
      }
    }

    // a different lexicon must refuse the checkpoint
    const PhoneInventory other = PhoneInventory::parse_lexicon_text(
        "ON AA N\nOFF AA F\n");
    CHECK_THROWS_AS(ToyAcousticModel::load(ckpt, other), LexiconError);
  }

  SUBCASE("empty corpus is rejected") {
    ToyAcousticModel m = ToyAcousticModel::random_init(
        static_cast<int>(cfg.dft_size), 2, {48, 32}, inv.state_count(), 1);
    TrainOptions opts;
    CHECK_THROWS_AS(train_toy(m, {}, inv, cfg, opts), ArgumentError);
  }
}
