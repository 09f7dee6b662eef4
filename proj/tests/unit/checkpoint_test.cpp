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

#include <cstring>
#include <limits>

#include "cwt/architecture.hpp"
#include "cwt/checkpoint.hpp"
#include "cwt/digest.hpp"
#include "cwt/error.hpp"
#include "cwt/network.hpp"

using namespace cwt;

namespace {

struct Fixture {
  ArchitectureSpec spec = reference_architecture(8);
  Network net = Network::build(spec, 42);
  AdamState adam{AdamConfig{}, net.parameters()};
  Fixture() {
    std::vector<Tensor> grads = net.zero_gradients();
    for (auto& g : grads) g.fill(0.01f);
    adam_step(net.parameters(), grads, adam);
  }
  Bytes bytes() const {
    return save_checkpoint(net, &adam, 3, {{"A", 0, 0.5}, {"B", 1, 0.25}, {"A", 2, 0.125}});
  }
};

}  // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("save, load, save is byte-identical and restores state") {
  Fixture f;
  const Bytes first = f.bytes();
  const Checkpoint parsed = parse_checkpoint(first);
  CHECK(parsed.global_epoch == 3);
  CHECK(parsed.history.size() == 3);
  CHECK(parsed.history[1] == SiteEpoch{"B", 1, 0.25});
  CHECK(parsed.architecture_hash == architecture_hash(f.spec));
  CHECK(serialize(parsed) == first);

  Restored r = load_checkpoint(first, f.spec, f.adam.config);
  CHECK(std::equal(r.network.parameters().begin(), r.network.parameters().end(), f.net.parameters().begin()));
  CHECK(r.adam.step_count == 1);
  CHECK(r.adam.second_moment == f.adam.second_moment);
  CHECK(save_checkpoint(r.network, &r.adam, 3, parsed.history) == first);
}

TEST_CASE("weights-only checkpoints restore with a fresh optimizer") {
  Fixture f;
  const Bytes bytes = save_checkpoint(f.net, nullptr, 0, {});
  Restored r = load_checkpoint(bytes, f.spec);
  CHECK(r.adam.step_count == 0);
  CHECK(r.network.parameter_count() == f.net.parameter_count());
}

TEST_CASE("every single-byte corruption is detected") {
  const ArchitectureSpec spec = parse_architecture("cwt-architecture 1\ninput_channels 1\nconv 2 3\nrelu\nconv 1 1\nsigmoid\n");
  const Network net = Network::build(spec, 1);
  const Bytes good = save_checkpoint(net, nullptr, 1, {{"A", 0, 0.75}});
  for (std::size_t i = 0; i < good.size(); ++i) {
    for (std::uint8_t flip : {std::uint8_t{0x01}, std::uint8_t{0x80}}) {
      Bytes bad = good;
      bad[i] ^= flip;
      CAPTURE(i);
      CHECK_THROWS_AS(parse_checkpoint(bad), ParseError);
    }
  }
}

TEST_CASE("payload corruption is reported as a checksum failure") {
  Fixture f;
  Bytes bad = f.bytes();
  bad[bad.size() / 2] ^= 0x10;
  try {
    parse_checkpoint(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.field() == "crc32");
  }
  const Bytes good = f.bytes();
  const Bytes short_stream(good.begin(), good.begin() + 10);
  CHECK_THROWS_AS(parse_checkpoint(short_stream), ParseError);
  Bytes magic = f.bytes();
  magic[0] = 'X';
  try {
    parse_checkpoint(magic);
  } catch (const ParseError& e) {
    CHECK(e.field() == "magic");
  }
}

TEST_CASE("a checkpoint for another architecture is rejected") {
  Fixture f;
  try {
    load_checkpoint(f.bytes(), reference_architecture(4));
    FAIL("expected incompatibility");
  } catch (const IncompatibleError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(to_hex(architecture_hash(f.spec))) != std::string::npos);
    CHECK(msg.find(to_hex(architecture_hash(reference_architecture(4)))) != std::string::npos);
  }
}

TEST_CASE("non-finite weights are never serialized") {
  Fixture f;
  f.net.parameters()[0][0] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(f.bytes(), NumericError);
}

}  // TEST_SUITE
