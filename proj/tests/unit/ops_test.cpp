// Copyright 2026 The CWT Authors. All Rights Reserved.
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

#include "cwt/error.hpp"
#include "cwt/ops.hpp"
#include "support/oracles.hpp"

using namespace cwt;
using oracle::gradient_error;
using oracle::random_tensor;
using oracle::weighted_sum;

namespace {

constexpr double kGradTolerance = 1e-3;
constexpr float kStep = 1e-2f;

// Pushes values at least `gap` away from the given kink points so central
// differences never straddle one.
void avoid(Tensor& t, std::initializer_list<float> kinks, float gap) {
  for (float& v : t.values()) {
    for (float k : kinks) {
      if (std::fabs(v - k) < gap) v = k + (v < k ? -gap : gap);
    }
  }
}

}  // namespace

TEST_SUITE("ops") {

TEST_CASE("conv2d matches a direct double-precision reference") {
  Rng rng(11);
  for (bool same : {true, false}) {
    for (std::size_t k : {1u, 3u, 5u}) {
      Tensor in = random_tensor({3, 9, 8}, rng);
      Tensor w = random_tensor({4, 3, k, k}, rng);
      Tensor b = random_tensor({4}, rng);
      Tensor out = ops::conv2d(in, w, b, same ? ops::Padding::kSame : ops::Padding::kValid);
      std::vector<double> ref = oracle::conv2d(in, w, b, same);
      REQUIRE(out.size() == ref.size());
      CHECK(out.extent(1) == (same ? 9 : 9 - k + 1));
      for (std::size_t i = 0; i < ref.size(); ++i) CHECK(out[i] == doctest::Approx(ref[i]).epsilon(1e-5));
    }
  }
}

TEST_CASE("conv2d gradients match central differences") {
  Rng rng(12);
  for (int trial = 0; trial < 12; ++trial) {
    const bool same = trial % 2 == 0;
    const std::size_t k = trial % 3 == 0 ? 1 : (trial % 3 == 1 ? 3 : 5);
    const auto pad = same ? ops::Padding::kSame : ops::Padding::kValid;
    Tensor in = random_tensor({2, 7, 6}, rng);
    Tensor w = random_tensor({3, 2, k, k}, rng);
    Tensor b = random_tensor({3}, rng);
    Tensor probe = random_tensor(ops::conv2d(in, w, b, pad).shape(), rng);
    ops::ConvGrads g = ops::conv2d_backward(in, w, probe, pad);
    auto loss = [&] { return weighted_sum(ops::conv2d(in, w, b, pad), probe); };
    CHECK(gradient_error(in.values(), g.input.values(), loss, kStep) < kGradTolerance);
    CHECK(gradient_error(w.values(), g.kernels.values(), loss, kStep) < kGradTolerance);
    CHECK(gradient_error(b.values(), g.bias.values(), loss, kStep) < kGradTolerance);
  }
}

TEST_CASE("activation gradients match central differences") {
  Rng rng(13);
  for (auto kind : {ops::Activation::kRelu, ops::Activation::kSigmoid}) {
    Tensor x = random_tensor({2, 5, 5}, rng, -4.0, 4.0);
    avoid(x, {0.0f}, 0.05f);
    Tensor probe = random_tensor(x.shape(), rng);
    Tensor g = ops::activation_backward(x, probe, kind);
    auto loss = [&] { return weighted_sum(ops::activation(x, kind), probe); };
    CHECK(gradient_error(x.values(), g.values(), loss, kStep) < kGradTolerance);
  }
}

TEST_CASE("sigmoid stays inside the open unit interval for moderate inputs") {
  CHECK(ops::sigmoid(0.0f) == 0.5f);
  CHECK(ops::sigmoid(15.0f) < 1.0f);
  CHECK(ops::sigmoid(-15.0f) > 0.0f);
  CHECK(ops::sigmoid(-200.0f) >= 0.0f);
}

TEST_CASE("pool2d drops partial edge windows and routes max gradients") {
  Tensor x({1, 5, 5});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = float(i);
  Tensor avg = ops::pool2d(x, ops::PoolKind::kAvg, 2);
  CHECK(avg.shape() == Shape{1, 2, 2});
  CHECK(avg(0, 0, 0) == doctest::Approx((0 + 1 + 5 + 6) / 4.0));
  Tensor mx = ops::pool2d(x, ops::PoolKind::kMax, 2);
  CHECK(mx(0, 1, 1) == 18.0f);
  Tensor g = ops::pool2d_backward(x, Tensor({1, 2, 2}, 1.0f), ops::PoolKind::kMax, 2);
  CHECK(g(0, 1, 1) == 1.0f);
  CHECK(g(0, 0, 0) == 0.0f);
  CHECK(g(0, 4, 4) == 0.0f);
  CHECK_THROWS_AS(ops::pool2d(Tensor({1, 1, 3}), ops::PoolKind::kAvg, 2), ContractViolation);
}

TEST_CASE("pooling gradients match central differences") {
  Rng rng(14);
  for (auto kind : {ops::PoolKind::kAvg, ops::PoolKind::kMax}) {
    for (std::size_t k : {2u, 3u}) {
      Tensor x({2, 7, 8});
      // Distinct, well-separated values keep each window's argmax stable.
      std::vector<float> vals(x.size());
      for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.1f * float(i);
      rng.shuffle(std::span(vals));
      std::copy(vals.begin(), vals.end(), x.data());
      Tensor probe = random_tensor(ops::pool2d(x, kind, k).shape(), rng);
      Tensor g = ops::pool2d_backward(x, probe, kind, k);
      auto loss = [&] { return weighted_sum(ops::pool2d(x, kind, k), probe); };
      CHECK(gradient_error(x.values(), g.values(), loss, kStep) < kGradTolerance);
    }
  }
}

TEST_CASE("avg_pool_same averages in-bounds neighbours only") {
  Tensor x({1, 3, 3}, 2.0f);
  Tensor y = ops::avg_pool_same(x, 3);
  for (float v : y.values()) CHECK(v == doctest::Approx(2.0));
  Tensor z({1, 3, 3});
  z(0, 0, 0) = 9.0f;
  Tensor p = ops::avg_pool_same(z, 3);
  CHECK(p(0, 0, 0) == doctest::Approx(9.0 / 4.0));
  CHECK(p(0, 1, 1) == doctest::Approx(1.0));
  CHECK(p(0, 2, 2) == doctest::Approx(0.0));
  CHECK_THROWS_AS(ops::avg_pool_same(x, 2), ContractViolation);
}

TEST_CASE("avg_pool_same and upsample gradients match central differences") {
  Rng rng(15);
  for (std::size_t k : {3u, 5u}) {
    Tensor x = random_tensor({2, 6, 7}, rng);
    Tensor probe = random_tensor(x.shape(), rng);
    Tensor g = ops::avg_pool_same_backward(x, probe, k);
    auto loss = [&] { return weighted_sum(ops::avg_pool_same(x, k), probe); };
    CHECK(gradient_error(x.values(), g.values(), loss, kStep) < kGradTolerance);
  }
  Tensor x = random_tensor({2, 3, 4}, rng);
  Tensor probe = random_tensor({2, 6, 8}, rng);
  Tensor g = ops::upsample2d_backward(x, probe, 2);
  auto loss = [&] { return weighted_sum(ops::upsample2d(x, 2), probe); };
  CHECK(gradient_error(x.values(), g.values(), loss, kStep) < kGradTolerance);
}

TEST_CASE("upsample2d repeats each pixel k x k times") {
  Tensor x({1, 1, 2}, std::vector<float>{1.0f, 2.0f});
  Tensor y = ops::upsample2d(x, 2);
  CHECK(y.shape() == Shape{1, 2, 4});
  CHECK(y.values()[0] == 1.0f);
  CHECK(y.values()[3] == 2.0f);
  CHECK(y.values()[5] == 1.0f);
}

TEST_CASE("intensity_window clamps then rescales") {
  Tensor x({1, 1, 4}, std::vector<float>{-50.0f, 0.0f, 25.0f, 150.0f});
  Tensor y = ops::intensity_window(x, 0.0f, 100.0f);
  CHECK(y.values()[0] == 0.0f);
  CHECK(y.values()[2] == doctest::Approx(0.25));
  CHECK(y.values()[3] == 1.0f);
  CHECK_THROWS_AS(ops::intensity_window(x, 1.0f, 1.0f), ContractViolation);

  Rng rng(16);
  Tensor v = random_tensor({1, 6, 6}, rng, -40.0, 140.0);
  avoid(v, {0.0f, 100.0f}, 0.5f);
  Tensor probe = random_tensor(v.shape(), rng);
  Tensor g = ops::intensity_window_backward(v, probe, 0.0f, 100.0f);
  auto loss = [&] { return weighted_sum(ops::intensity_window(v, 0.0f, 100.0f), probe); };
  CHECK(gradient_error(v.values(), g.values(), loss, 0.1f) < kGradTolerance);
}

TEST_CASE("concat_channels splits its gradient back per input") {
  Rng rng(17);
  std::vector<Tensor> parts{random_tensor({1, 2, 2}, rng), random_tensor({2, 2, 2}, rng)};
  Tensor cat = ops::concat_channels(parts);
  CHECK(cat.shape() == Shape{3, 2, 2});
  CHECK(cat(2, 1, 1) == parts[1](1, 1, 1));
  const std::size_t counts[] = {1, 2};
  std::vector<Tensor> back = ops::concat_channels_backward(cat, counts);
  CHECK(back[0] == parts[0]);
  CHECK(back[1] == parts[1]);
  std::vector<Tensor> bad{Tensor({1, 2, 2}), Tensor({1, 3, 2})};
  CHECK_THROWS_AS(ops::concat_channels(bad), ContractViolation);
}

TEST_CASE("conv2d rejects inconsistent shapes") {
  CHECK_THROWS_AS(ops::conv2d(Tensor({2, 4, 4}), Tensor({1, 3, 3, 3}), Tensor({1}), ops::Padding::kSame),
                  ContractViolation);
  CHECK_THROWS_AS(ops::conv2d(Tensor({1, 4, 4}), Tensor({1, 1, 2, 2}), Tensor({1}), ops::Padding::kSame),
                  ContractViolation);
  CHECK_THROWS_AS(ops::conv2d(Tensor({1, 2, 2}), Tensor({1, 1, 3, 3}), Tensor({1}), ops::Padding::kValid),
                  ContractViolation);
}

}  // TEST_SUITE
