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

#include "cwt/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <string>

#include "cwt/error.hpp"

namespace cwt {
namespace {

constexpr char kMagic[4] = {'M', 'S', 'L', 'W'};
constexpr std::uint64_t kHalf = 1ull << 24;

class Encoder {
 public:
  Bytes out;

  template <typename T>
  void put(T v) {
    auto raw = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(v);
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    out.insert(out.end(), raw.begin(), raw.end());
  }
  void text(const std::string& s, const char* what) {
    if (s.size() > 0xffff) throw ContractViolation(std::string("checkpoint: ") + what + " too long");
    put<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  }
};

class Decoder {
 public:
  explicit Decoder(std::span<const std::uint8_t> b) : bytes_(b) {}

  std::size_t offset() const { return pos_; }

  template <typename T>
  T get(const char* field) {
    need(sizeof(T), field);
    std::array<std::uint8_t, sizeof(T)> raw{};
    std::memcpy(raw.data(), bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    pos_ += sizeof(T);
    return std::bit_cast<T>(raw);
  }
  std::string text(const char* field) {
    const auto n = get<std::uint16_t>(field);
    need(n, field);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n, const char* field) const {
    if (bytes_.size() - pos_ < n) {
      throw ParseError("checkpoint", field, pos_, "truncated stream");
    }
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::string hash_text(const Digest& d) { return to_hex(d); }

}  // namespace

Bytes serialize(const Checkpoint& c) {
  Encoder e;
  e.out.insert(e.out.end(), kMagic, kMagic + 4);
  e.put<std::uint32_t>(c.version);
  e.out.insert(e.out.end(), c.architecture_hash.begin(), c.architecture_hash.end());
  e.put<std::uint32_t>(c.global_epoch);
  e.put<std::uint32_t>(static_cast<std::uint32_t>(c.history.size()));
  for (const SiteEpoch& h : c.history) {
    e.text(h.site_id, "site id");
    e.put<std::uint32_t>(h.epoch);
    e.put<double>(h.validation_loss);
  }
  e.put<std::uint32_t>(static_cast<std::uint32_t>(c.tensors.size()));
  for (const NamedTensor& t : c.tensors) {
    e.text(t.name, "tensor name");
    if (t.tensor.rank() > 255) throw ContractViolation("checkpoint: tensor rank above 255");
    e.put<std::uint8_t>(static_cast<std::uint8_t>(t.tensor.rank()));
    for (const std::size_t d : t.tensor.shape()) {
      if (d > 0xffffffffu) throw ContractViolation("checkpoint: extent exceeds u32");
      e.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    }
    for (const float v : t.tensor.values()) e.put<float>(v);
  }
  e.put<std::uint32_t>(crc32(e.out));
  return std::move(e.out);
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError("checkpoint", "magic", 0, "expected \"MSLW\"");
  }
  if (bytes.size() < 8) throw ParseError("checkpoint", "version", 4, "truncated stream");
  const std::size_t body = bytes.size() - 4;
  {
    Decoder tail(bytes.subspan(body));
    const auto stored = tail.get<std::uint32_t>("crc32");
    const std::uint32_t actual = crc32(bytes.first(body));
    if (stored != actual) {
      throw ParseError("checkpoint", "crc32", body,
                       "checksum mismatch (stored " + std::to_string(stored) + ", computed " +
                           std::to_string(actual) + ")");
    }
  }
  Decoder d(bytes.first(body));
  d.get<std::uint32_t>("magic");
  Checkpoint c;
  const std::size_t version_at = d.offset();
  c.version = d.get<std::uint32_t>("version");
  if (c.version != kCheckpointVersion) {
    throw ParseError("checkpoint", "version", version_at, "unsupported version " + std::to_string(c.version));
  }
  for (auto& b : c.architecture_hash) b = d.get<std::uint8_t>("architecture_hash");
  c.global_epoch = d.get<std::uint32_t>("global_epoch");
  const auto n = d.get<std::uint32_t>("site_history count");
  for (std::uint32_t i = 0; i < n; ++i) {
    SiteEpoch h;
    h.site_id = d.text("site_history id");
    h.epoch = d.get<std::uint32_t>("site_history epoch");
    h.validation_loss = d.get<double>("site_history loss");
    c.history.push_back(std::move(h));
  }
  const auto m = d.get<std::uint32_t>("tensor count");
  for (std::uint32_t i = 0; i < m; ++i) {
    NamedTensor t{d.text("tensor name"), Tensor({1})};
    const std::size_t rank_at = d.offset();
    const auto rank = d.get<std::uint8_t>("tensor ndim");
    if (rank == 0) throw ParseError("checkpoint", "tensor ndim", rank_at, "zero-rank tensor");
    Shape shape;
    std::size_t count = 1;
    for (std::uint8_t k = 0; k < rank; ++k) {
      const std::size_t at = d.offset();
      const auto e = d.get<std::uint32_t>("tensor dims");
      if (e == 0) throw ParseError("checkpoint", "tensor dims", at, "zero extent");
      shape.push_back(e);
      count *= e;
      if (count > body / 4) throw ParseError("checkpoint", "tensor dims", at, "payload larger than stream");
    }
    d.need(count * 4, "tensor payload");
    std::vector<float> values(count);
    for (float& v : values) v = d.get<float>("tensor payload");
    t.tensor = Tensor(std::move(shape), std::move(values));
    c.tensors.push_back(std::move(t));
  }
  if (d.offset() != body) {
    throw ParseError("checkpoint", "crc32", d.offset(), "unexpected bytes before the checksum");
  }
  return c;
}

Checkpoint make_checkpoint(const Network& net, const AdamState* adam, std::uint32_t global_epoch,
                           std::vector<SiteEpoch> history) {
  Checkpoint c;
  c.architecture_hash = net.architecture_hash();
  c.global_epoch = global_epoch;
  c.history = std::move(history);
  const auto params = net.parameters();
  const auto& names = net.parameter_names();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].all_finite()) {
      throw NumericError("checkpoint: parameter " + names[i] + " holds non-finite values");
    }
    c.tensors.push_back({names[i], params[i]});
  }
  if (adam) {
    for (std::size_t i = 0; i < params.size(); ++i) c.tensors.push_back({"adam.m." + names[i], adam->first_moment[i]});
    for (std::size_t i = 0; i < params.size(); ++i) c.tensors.push_back({"adam.v." + names[i], adam->second_moment[i]});
    if (adam->step_count >= kHalf * kHalf) throw ContractViolation("checkpoint: optimizer step count overflow");
    c.tensors.push_back({"adam.step", Tensor({2}, {static_cast<float>(adam->step_count / kHalf),
                                                   static_cast<float>(adam->step_count % kHalf)})});
  }
  return c;
}

Restored restore(const Checkpoint& c, const ArchitectureSpec& expected, const AdamConfig& adam_config) {
  const Digest want = architecture_hash(expected);
  if (c.architecture_hash != want) {
    throw IncompatibleError("checkpoint architecture " + hash_text(c.architecture_hash) +
                            " does not match configured architecture " + hash_text(want));
  }
  Network net = Network::build(expected, 0);
  const auto params = net.parameters();
  const auto& names = net.parameter_names();
  const std::size_t p = params.size();
  if (c.tensors.size() != p && c.tensors.size() != 3 * p + 1) {
    throw IncompatibleError("checkpoint holds " + std::to_string(c.tensors.size()) +
                            " tensors; architecture needs " + std::to_string(p) + " (or " +
                            std::to_string(3 * p + 1) + " with optimizer state)");
  }
  auto take = [&](std::size_t slot, const std::string& name, const Tensor& like) -> const Tensor& {
    const NamedTensor& t = c.tensors[slot];
    if (t.name != name || !t.tensor.same_shape(like)) {
      throw IncompatibleError("checkpoint tensor " + std::to_string(slot) + " is '" + t.name + "' " +
                              shape_string(t.tensor.shape()) + ", expected '" + name + "' " +
                              shape_string(like.shape()));
    }
    return t.tensor;
  };
  for (std::size_t i = 0; i < p; ++i) params[i] = take(i, names[i], params[i]);
  AdamState adam(adam_config, net.parameters());
  if (c.tensors.size() == 3 * p + 1) {
    for (std::size_t i = 0; i < p; ++i) adam.first_moment[i] = take(p + i, "adam.m." + names[i], params[i]);
    for (std::size_t i = 0; i < p; ++i) adam.second_moment[i] = take(2 * p + i, "adam.v." + names[i], params[i]);
    const Tensor& step = take(3 * p, "adam.step", Tensor({2}));
    adam.step_count = static_cast<std::uint64_t>(step[0]) * kHalf + static_cast<std::uint64_t>(step[1]);
  }
  return {std::move(net), std::move(adam)};
}

Bytes save_checkpoint(const Network& net, const AdamState* adam, std::uint32_t global_epoch,
                      std::vector<SiteEpoch> history) {
  return serialize(make_checkpoint(net, adam, global_epoch, std::move(history)));
}

Restored load_checkpoint(std::span<const std::uint8_t> bytes, const ArchitectureSpec& expected,
                         const AdamConfig& adam) {
  return restore(parse_checkpoint(bytes), expected, adam);
}

}  // namespace cwt
