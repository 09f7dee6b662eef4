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

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cwt/digest.hpp"

namespace cwt {

inline constexpr const char* kTokenName = "token";

/// Shared drop-box between sites. Names are relative paths using '/'.
class ExchangeStore {
 public:
  virtual ~ExchangeStore() = default;

  /// Readers observe either the previous or the complete new content.
  virtual void put_atomic(const std::string& name, std::span<const std::uint8_t> bytes) = 0;
  virtual std::optional<Bytes> get(const std::string& name) = 0;
  /// Sorted names of all committed objects, including the token.
  virtual std::vector<std::string> list() = 0;

  /// Compare-and-swap of the token text. expected == nullopt creates the
  /// token and fails if one exists.
  virtual bool swap_token(const std::optional<std::string>& expected, const std::string& desired) = 0;
  virtual std::optional<std::string> read_token() = 0;
};

/// In-process store for tests and threaded runs.
class MemoryStore final : public ExchangeStore {
 public:
  void put_atomic(const std::string& name, std::span<const std::uint8_t> bytes) override;
  std::optional<Bytes> get(const std::string& name) override;
  std::vector<std::string> list() override;
  bool swap_token(const std::optional<std::string>& expected, const std::string& desired) override;
  std::optional<std::string> read_token() override;

 private:
  std::mutex mutex_;
  std::map<std::string, Bytes> objects_;
  std::optional<std::string> token_;
};

/// Directory-backed store. Objects are written via temp file + rename; the
/// token is claimed by renaming it away, which only one contender can do.
class DirectoryStore final : public ExchangeStore {
 public:
  explicit DirectoryStore(std::filesystem::path root);

  void put_atomic(const std::string& name, std::span<const std::uint8_t> bytes) override;
  std::optional<Bytes> get(const std::string& name) override;
  std::vector<std::string> list() override;
  bool swap_token(const std::optional<std::string>& expected, const std::string& desired) override;
  std::optional<std::string> read_token() override;

  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path path_of(const std::string& name) const;

  std::filesystem::path root_;
};

/// Forwards to another store and reports every write to an observer.
class ObservedStore final : public ExchangeStore {
 public:
  using Observer = std::function<void(const std::string& name, std::span<const std::uint8_t> bytes)>;

  ObservedStore(ExchangeStore& inner, Observer observer)
      : inner_(inner), observer_(std::move(observer)) {}

  void put_atomic(const std::string& name, std::span<const std::uint8_t> bytes) override;
  std::optional<Bytes> get(const std::string& name) override { return inner_.get(name); }
  std::vector<std::string> list() override { return inner_.list(); }
  bool swap_token(const std::optional<std::string>& expected, const std::string& desired) override;
  std::optional<std::string> read_token() override { return inner_.read_token(); }

 private:
  ExchangeStore& inner_;
  Observer observer_;
};

}  // namespace cwt
