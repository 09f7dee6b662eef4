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

#include "cwt/store.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <string_view>
#include <system_error>
#include <thread>

#include <unistd.h>

#include "cwt/error.hpp"
#include "cwt/io.hpp"

namespace cwt {
namespace fs = std::filesystem;
namespace {

std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

void check_name(const std::string& name) {
  if (name.empty() || name.front() == '/' || name.find("..") != std::string::npos ||
      name.find(".tmp.") != std::string::npos || name.find(".claim.") != std::string::npos) {
    throw ContractViolation("store: invalid object name '" + name + "'");
  }
}

std::string unique_suffix() {
  static std::atomic<unsigned> counter{0};
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  return std::to_string(::getpid()) + "." + std::to_string(tid % 1000000) + "." +
         std::to_string(counter++);
}

}  // namespace

// ---- MemoryStore ----

void MemoryStore::put_atomic(const std::string& name, std::span<const std::uint8_t> bytes) {
  check_name(name);
  if (name == kTokenName) throw ContractViolation("store: the token changes only through swap_token");
  std::lock_guard lock(mutex_);
  objects_[name] = Bytes(bytes.begin(), bytes.end());
}

std::optional<Bytes> MemoryStore::get(const std::string& name) {
  std::lock_guard lock(mutex_);
  if (name == kTokenName) {
    if (!token_) return std::nullopt;
    return Bytes(token_->begin(), token_->end());
  }
  const auto it = objects_.find(name);
  if (it == objects_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> MemoryStore::list() {
  std::lock_guard lock(mutex_);
  std::vector<std::string> names;
  for (const auto& [name, _] : objects_) names.push_back(name);
  if (token_) names.push_back(kTokenName);
  std::sort(names.begin(), names.end());
  return names;
}

bool MemoryStore::swap_token(const std::optional<std::string>& expected, const std::string& desired) {
  std::lock_guard lock(mutex_);
  if (token_ != expected) return false;
  token_ = desired;
  return true;
}

std::optional<std::string> MemoryStore::read_token() {
  std::lock_guard lock(mutex_);
  return token_;
}

// ---- DirectoryStore ----

DirectoryStore::DirectoryStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (!fs::is_directory(root_)) throw IoError("store: cannot create directory " + root_.string());
}

fs::path DirectoryStore::path_of(const std::string& name) const {
  check_name(name);
  return root_ / fs::path(name);
}

void DirectoryStore::put_atomic(const std::string& name, std::span<const std::uint8_t> bytes) {
  if (name == kTokenName) throw ContractViolation("store: the token changes only through swap_token");
  const fs::path p = path_of(name);
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  write_file_atomic(p, bytes);
}

std::optional<Bytes> DirectoryStore::get(const std::string& name) {
  const fs::path p = path_of(name);
  std::error_code ec;
  if (!fs::exists(p, ec)) return std::nullopt;
  try {
    return read_file(p);
  } catch (const IoError&) {
    if (!fs::exists(p, ec)) return std::nullopt;  // removed concurrently
    throw;
  }
}

std::vector<std::string> DirectoryStore::list() {
  std::vector<std::string> names;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(root_, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (!it->is_regular_file(ec)) continue;
    const std::string rel = fs::relative(it->path(), root_, ec).generic_string();
    if (rel.find(".tmp.") != std::string::npos || rel.find(".claim.") != std::string::npos) continue;
    names.push_back(rel);
  }
  std::sort(names.begin(), names.end());
  return names;
}

bool DirectoryStore::swap_token(const std::optional<std::string>& expected, const std::string& desired) {
  const fs::path token = root_ / kTokenName;
  fs::path tmp = token;
  tmp += ".tmp." + unique_suffix();
  if (!expected) {
    write_file_atomic(tmp, as_bytes(desired));
    // link() refuses to replace an existing name: exclusive creation.
    const int rc = ::link(tmp.c_str(), token.c_str());
    std::error_code ec;
    fs::remove(tmp, ec);
    return rc == 0;
  }
  fs::path claim = token;
  claim += ".claim." + unique_suffix();
  std::error_code ec;
  fs::rename(token, claim, ec);
  if (ec) return false;  // absent or claimed by a peer
  Bytes current;
  try {
    current = read_file(claim);
  } catch (const IoError&) {
    fs::rename(claim, token, ec);
    throw;
  }
  if (std::string(current.begin(), current.end()) != *expected) {
    fs::rename(claim, token, ec);
    if (ec) throw ProtocolError("store: failed to restore token after a mismatched swap");
    return false;
  }
  write_file_atomic(tmp, as_bytes(desired));
  fs::rename(tmp, token, ec);
  if (ec) {
    fs::rename(claim, token, ec);
    throw ProtocolError("store: failed to install the new token");
  }
  fs::remove(claim, ec);
  return true;
}

std::optional<std::string> DirectoryStore::read_token() {
  const fs::path token = root_ / kTokenName;
  // A swap in progress briefly leaves no token; retry before reporting absence.
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::error_code ec;
    if (fs::exists(token, ec)) {
      try {
        const Bytes b = read_file(token);
        return std::string(b.begin(), b.end());
      } catch (const IoError&) {
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  return std::nullopt;
}

// ---- ObservedStore ----

void ObservedStore::put_atomic(const std::string& name, std::span<const std::uint8_t> bytes) {
  observer_(name, bytes);
  inner_.put_atomic(name, bytes);
}

bool ObservedStore::swap_token(const std::optional<std::string>& expected, const std::string& desired) {
  observer_(kTokenName, as_bytes(desired));
  return inner_.swap_token(expected, desired);
}

}  // namespace cwt
