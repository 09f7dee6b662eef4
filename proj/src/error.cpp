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

#include "cwt/error.hpp"

#include <cmath>
#include <numbers>

#include "cwt/rng.hpp"

namespace cwt {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kContractViolation: return "contract violation";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kIncompatible: return "incompatible checkpoint";
    case ErrorKind::kNumeric: return "numeric fault";
    case ErrorKind::kProtocol: return "protocol fault";
    case ErrorKind::kTimeout: return "timeout";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kIo: return "io error";
    case ErrorKind::kGeneration: return "generation error";
    case ErrorKind::kDegenerateSample: return "degenerate sample";
    case ErrorKind::kUndefinedCorrelation: return "undefined correlation";
  }
  return "unknown error";
}

ParseError::ParseError(const std::string& what_format, const std::string& field,
                       std::size_t byte_offset, const std::string& detail)
    : Error(ErrorKind::kParse, what_format + ": field '" + field +
                                   "' at byte " + std::to_string(byte_offset) +
                                   ": " + detail),
      field_(field),
      byte_offset_(byte_offset) {}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t a, std::uint64_t b) noexcept {
  // FNV-1a over the tag, then chained splitmix64 mixing.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = splitmix64(master ^ h);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ (b + 0x632be59bd9b4e019ULL));
  return s;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

}  // namespace cwt
