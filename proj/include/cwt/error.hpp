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

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace cwt {

enum class ErrorKind {
  kContractViolation,
  kValidation,
  kParse,
  kIncompatible,
  kNumeric,
  kProtocol,
  kTimeout,
  kConfig,
  kIo,
  kGeneration,
  kDegenerateSample,
  kUndefinedCorrelation,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base of every error raised by the library. The kind drives the C API
/// status code and, through it, the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// A caller broke an operation's precondition (shape mismatch, bad extent).
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& message)
      : Error(ErrorKind::kContractViolation, message) {}
};

/// Malformed declarative input, e.g. an architecture descriptor.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::kValidation, message) {}
};

/// Binary or text input that cannot be decoded. Carries the offending field
/// and the byte offset where decoding stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what_format, const std::string& field,
             std::size_t byte_offset, const std::string& detail);

  const std::string& field() const noexcept { return field_; }
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::string field_;
  std::size_t byte_offset_;
};

/// A checkpoint built for one architecture presented to another.
class IncompatibleError : public Error {
 public:
  explicit IncompatibleError(const std::string& message)
      : Error(ErrorKind::kIncompatible, message) {}
};

/// Non-finite values reached a loss, gradient, or optimizer.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message,
                        std::optional<std::size_t> epoch = std::nullopt)
      : Error(ErrorKind::kNumeric, message), epoch_(epoch) {}

  std::optional<std::size_t> epoch() const noexcept { return epoch_; }

 private:
  std::optional<std::size_t> epoch_;
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& message)
      : Error(ErrorKind::kProtocol, message) {}
};

class TimeoutError : public Error {
 public:
  explicit TimeoutError(const std::string& message)
      : Error(ErrorKind::kTimeout, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorKind::kConfig, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorKind::kIo, message) {}
};

class GenerationError : public Error {
 public:
  explicit GenerationError(const std::string& message)
      : Error(ErrorKind::kGeneration, message) {}
};

/// Wilcoxon input whose differences are all zero.
class DegenerateSampleError : public Error {
 public:
  explicit DegenerateSampleError(const std::string& message)
      : Error(ErrorKind::kDegenerateSample, message) {}
};

/// Pearson correlation requested on a zero-variance vector.
class UndefinedCorrelationError : public Error {
 public:
  explicit UndefinedCorrelationError(const std::string& message)
      : Error(ErrorKind::kUndefinedCorrelation, message) {}
};

}  // namespace cwt
