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

#include "cwt/adam.hpp"
#include "cwt/architecture.hpp"
#include "cwt/error.hpp"
#include "cwt/network.hpp"
#include "support/oracles.hpp"

using namespace cwt;

namespace {

// Parameter count of the reference network, tallied from its published
// layer widths rather than from the spec builder.
std::size_t reference_count_by_hand(std::size_t d) {
  auto w = [d](std::size_t n) { return std::max<std::size_t>(n / d, 1); };
  auto conv = [](std::size_t in, std::size_t out, std::size_t k) { return out * in * k * k + out; };
  auto inception = [&](std::size_t in, std::size_t b) {
    return conv(in, b, 1) + (conv(in, b, 1) + conv(b, b, 3)) + (conv(in, b, 1) + conv(b, b, 5)) +
           conv(in, b, 1);
  };
  const std::size_t stem = w(32), mid = w(64), head = w(32), branch = w(16);
  return conv(1, stem, 3) + inception(stem, branch) + conv(4 * branch, mid, 3) + inception(mid, branch) +
         conv(4 * branch, head, 3) + conv(head, 1, 1);
}

ArchitectureSpec tiny_spec() {
  using namespace layers;
  ArchitectureSpec s;
  s.layers = {window(-1.0f, 1.0f), conv(2, 3), relu(), maxpool(2), inception({{conv(1, 1)}, {avgpool_same(3), conv(2, 3)}}),
              upsample(2), conv(2, 3), sigmoid(), conv(1, 1), sigmoid()};
  return s;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("reference network parameter counts") {
  CHECK(Network::build(reference_architecture(1), 0).parameter_count() == 79489);
  for (std::size_t d : {1u, 2u, 4u, 8u}) {
    CHECK(Network::build(reference_architecture(d), 0).parameter_count() == reference_count_by_hand(d));
  }
}

TEST_CASE("canonical text round-trips and hashes ignore formatting") {
  const ArchitectureSpec spec = reference_architecture(4);
  const std::string text = canonical_text(spec);
  CHECK(parse_architecture(text) == spec);
  std::string noisy = "# comment\n\n" + text;
  for (std::size_t i = 0; (i = noisy.find(' ', i)) != std::string::npos; i += 3) noisy.replace(i, 1, "   ");
  CHECK(architecture_hash(parse_architecture(noisy)) == architecture_hash(spec));
  CHECK(architecture_hash(reference_architecture(2)) != architecture_hash(spec));
}

TEST_CASE("malformed descriptors are rejected with their location") {
  using namespace layers;
  ArchitectureSpec even = reference_architecture(4);
  even.layers.insert(even.layers.begin() + 1, inception({{conv(2, 1)}, {conv(2, 4)}}));
  try {
    validate(even);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("layers[1]") != std::string::npos);
    CHECK(msg.find("branch[1]") != std::string::npos);
  }
  ArchitectureSpec no_head;
  no_head.layers = {conv(1, 3), relu()};
  CHECK_THROWS_AS(validate(no_head), ValidationError);
  CHECK_THROWS_AS(parse_architecture("cwt-architecture 2\ninput_channels 1\n"), ParseError);
  CHECK_THROWS_AS(parse_architecture("cwt-architecture 1\ninput_channels 1\ninception\nbranch conv 1 1\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_architecture("cwt-architecture 1\ninput_channels 1\nconv x 3\n"), ParseError);
}

TEST_CASE("inference works on arbitrary aligned sizes with outputs in (0,1)") {
  const Network net = Network::build(reference_architecture(8), 3);
  Rng rng(4);
  for (std::size_t s : {7u, 16u, 33u}) {
    Tensor x = oracle::random_tensor({1, s, s + 2}, rng, -100.0, 150.0);
    Tensor y = net.forward(x);
    CHECK(y.shape() == Shape{1, s, s + 2});
    for (float v : y.values()) {
      REQUIRE(v > 0.0f);
      REQUIRE(v < 1.0f);
    }
  }
  const Network pooled = Network::build(tiny_spec(), 1);
  CHECK(pooled.minimum_extent() == 2);
  CHECK_THROWS_AS(pooled.forward(Tensor({1, 5, 6})), ContractViolation);
  CHECK_THROWS_AS(pooled.forward(Tensor({2, 6, 6})), ContractViolation);
  CHECK(pooled.forward(Tensor({1, 6, 8})).shape() == Shape{1, 6, 8});
}

TEST_CASE("initialisation is deterministic in the seed") {
  const Network a = Network::build(reference_architecture(4), 9);
  const Network b = Network::build(reference_architecture(4), 9);
  const Network c = Network::build(reference_architecture(4), 10);
  CHECK(std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin()));
  CHECK_FALSE(std::equal(a.parameters().begin(), a.parameters().end(), c.parameters().begin()));
  CHECK(a.parameter_names().front() == "L1.conv.weight");
}

TEST_CASE("end-to-end network gradient matches central differences") {
  Network net = Network::build(tiny_spec(), 5);
  Rng rng(6);
  Tensor x = oracle::random_tensor({1, 6, 6}, rng, -0.9, 0.9);
  Tensor probe = oracle::random_tensor({1, 6, 6}, rng);
  Tape tape;
  net.forward(x, tape);
  std::vector<Tensor> grads = net.zero_gradients();
  net.backward(tape, probe, grads);
  auto loss = [&] { return oracle::weighted_sum(net.forward(x), probe); };
  // Ten stacked float32 layers: a wider step keeps roundoff below the
  // tolerance. No ReLU or max-pool kink is crossed at this seed.
  for (std::size_t i = 0; i < grads.size(); ++i) {
    CAPTURE(net.parameter_names()[i]);
    CHECK(oracle::gradient_error(net.parameters()[i].values(), grads[i].values(), loss, 3e-2f) < 1e-3);
  }
}

TEST_CASE("adam step matches the bias-corrected update rule") {
  AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
  std::vector<Tensor> params{Tensor({3}, std::vector<float>{1.0f, -2.0f, 0.5f})};
  AdamState state(cfg, params);
  std::vector<double> p{1.0, -2.0, 0.5}, m(3, 0.0), v(3, 0.0);
  const std::vector<std::vector<float>> gs{{0.1f, -0.3f, 0.0f}, {0.2f, 0.1f, -1.0f}, {-0.5f, 0.0f, 2.0f}};
  for (std::size_t t = 0; t < gs.size(); ++t) {
    std::vector<Tensor> grads{Tensor({3}, gs[t])};
    adam_step(params, grads, state);
    for (std::size_t i = 0; i < 3; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * gs[t][i];
      v[i] = 0.999 * v[i] + 0.001 * double(gs[t][i]) * gs[t][i];
      const double mh = m[i] / (1 - std::pow(0.9, double(t + 1)));
      const double vh = v[i] / (1 - std::pow(0.999, double(t + 1)));
      p[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(params[0][i] == doctest::Approx(p[i]).epsilon(1e-5));
    }
  }
  CHECK(state.step_count == 3);
  std::vector<Tensor> bad{Tensor({3}, std::vector<float>{0.0f, NAN, 0.0f})};
  const Tensor before = params[0];
  CHECK_THROWS_AS(adam_step(params, bad, state), NumericError);
  CHECK(params[0] == before);
  CHECK(state.step_count == 3);
  CHECK_THROWS_AS(AdamState(AdamConfig{-1.0}, params), ConfigError);
}

}  // TEST_SUITE
