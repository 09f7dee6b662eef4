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

#include "cwt/protocol.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <sstream>
#include <thread>

#include "cwt/error.hpp"
#include "cwt/rng.hpp"

namespace cwt {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::span<const std::uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::size_t roster_index(const SiteRuntime& rt) {
  const auto it = std::find(rt.roster.begin(), rt.roster.end(), rt.site_id);
  if (it == rt.roster.end()) throw ContractViolation("site '" + rt.site_id + "' is not in the roster");
  return static_cast<std::size_t>(it - rt.roster.begin());
}

const std::string& next_site(const SiteRuntime& rt) {
  return rt.roster[(roster_index(rt) + 1) % rt.roster.size()];
}

ExchangeStore& store_of(const SiteRuntime& rt) {
  if (!rt.store) throw ContractViolation("site runtime has no exchange store");
  return *rt.store;
}

bool should_stop(const SiteRuntime& rt, std::span<const SiteEpoch> history, std::uint32_t epoch) {
  if (rt.options.max_epochs > 0 && epoch + 1 >= rt.options.max_epochs) return true;
  return history_converged(history, rt.options.mode, rt.options.min_delta, rt.options.patience, rt.roster);
}

TurnToken read_current(ExchangeStore& store) {
  const auto text = store.read_token();
  if (!text) throw ProtocolError("turn token is absent from the store");
  return TurnToken::parse(*text);
}

Bytes latest_checkpoint(ExchangeStore& store, std::uint32_t global_epoch) {
  std::string name = kInitialCheckpointName;
  if (global_epoch > 0) {
    const std::string prefix = "checkpoints/epoch_" + std::to_string(global_epoch - 1) + "_";
    name.clear();
    for (const std::string& n : store.list()) {
      if (n.rfind(prefix, 0) == 0 && n.size() > 5 && n.compare(n.size() - 5, 5, ".ckpt") == 0) {
        if (!name.empty()) throw ProtocolError("two checkpoints stored for epoch " + std::to_string(global_epoch - 1));
        name = n;
      }
    }
    if (name.empty()) throw ProtocolError("no checkpoint stored for epoch " + std::to_string(global_epoch - 1));
  }
  auto bytes = store.get(name);
  if (!bytes) throw ProtocolError("checkpoint " + name + " is missing");
  return std::move(*bytes);
}

void mark_aborted(ExchangeStore& store) {
  try {
    for (int attempt = 0; attempt < 10; ++attempt) {
      const auto text = store.read_token();
      if (!text) return;
      TurnToken t = TurnToken::parse(*text);
      if (t.status != TokenStatus::kRunning) return;
      t.status = TokenStatus::kAborted;
      if (store.swap_token(*text, t.serialize())) return;
    }
  } catch (...) {
    // Best effort: the original fault is what the caller reports.
  }
}

}  // namespace

std::string to_string(TokenStatus status) {
  switch (status) {
    case TokenStatus::kRunning: return "running";
    case TokenStatus::kConverged: return "converged";
    case TokenStatus::kAborted: return "aborted";
  }
  return "unknown";
}

std::string TurnToken::serialize() const {
  return site + " " + std::to_string(global_epoch) + " " + to_string(status) + "\n";
}

TurnToken TurnToken::parse(const std::string& text) {
  std::istringstream in(text);
  TurnToken t;
  std::string epoch, status, extra;
  if (!(in >> t.site >> epoch >> status) || (in >> extra) || epoch.empty() ||
      !std::all_of(epoch.begin(), epoch.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      epoch.size() > 9) {
    throw ProtocolError("corrupt turn token: '" + text + "'");
  }
  t.global_epoch = static_cast<std::uint32_t>(std::stoul(epoch));
  if (status == "running") {
    t.status = TokenStatus::kRunning;
  } else if (status == "converged") {
    t.status = TokenStatus::kConverged;
  } else if (status == "aborted") {
    t.status = TokenStatus::kAborted;
  } else {
    throw ProtocolError("corrupt turn token status '" + status + "'");
  }
  return t;
}

std::string checkpoint_name(std::uint32_t global_epoch, const std::string& site) {
  return "checkpoints/epoch_" + std::to_string(global_epoch) + "_" + site + ".ckpt";
}

std::string AuditRecord::to_line() const {
  return "site=" + site + " epoch=" + std::to_string(epoch) + " train_loss=" + format_double(train_loss) +
         " val_loss=" + format_double(validation_loss) + " next_site=" + next.site +
         " next_epoch=" + std::to_string(next.global_epoch) + " status=" + to_string(next.status) +
         " wall_s=" + format_double(wall_seconds);
}

std::uint64_t initial_network_seed(std::uint64_t master_seed) { return derive_seed(master_seed, "init"); }

std::uint64_t shuffle_seed(std::uint64_t master_seed, const std::string& site, std::uint32_t epoch) {
  return derive_seed(derive_seed(master_seed, "shuffle"), site, epoch);
}

Bytes initial_checkpoint(const ArchitectureSpec& spec, const AdamConfig& adam, std::uint64_t master_seed) {
  const Network net = Network::build(spec, initial_network_seed(master_seed));
  const AdamState state(adam, net.parameters());
  return save_checkpoint(net, &state, 0, {});
}

TurnToken init_msl(ExchangeStore& store, const std::vector<std::string>& roster,
                   std::span<const std::uint8_t> initial) {
  if (roster.empty()) throw ContractViolation("init_msl: empty roster");
  for (std::size_t i = 0; i < roster.size(); ++i) {
    const std::string& s = roster[i];
    if (s.empty() || s.find_first_of(" \t\n/") != std::string::npos) {
      throw ContractViolation("init_msl: site id '" + s + "' must be non-empty without spaces or '/'");
    }
    if (std::find(roster.begin(), roster.begin() + static_cast<std::ptrdiff_t>(i), s) !=
        roster.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw ContractViolation("init_msl: duplicate site id '" + s + "'");
    }
  }
  if (store.read_token() || !store.list().empty()) {
    throw ProtocolError("store is already initialized; reset it explicitly before a new run");
  }
  parse_checkpoint(initial);
  store.put_atomic(kInitialCheckpointName, initial);
  const TurnToken token{roster.front(), 0, TokenStatus::kRunning};
  if (!store.swap_token(std::nullopt, token.serialize())) {
    throw ProtocolError("store is already initialized (token created concurrently)");
  }
  return token;
}

Turn acquire_turn(const SiteRuntime& rt) {
  ExchangeStore& store = store_of(rt);
  roster_index(rt);
  const auto deadline = std::chrono::steady_clock::now() + rt.options.timeout;
  for (;;) {
    const TurnToken t = read_current(store);
    if (t.status == TokenStatus::kAborted) {
      throw ProtocolError("run was aborted (token " + t.site + " " + std::to_string(t.global_epoch) + ")");
    }
    if (t.status == TokenStatus::kConverged) {
      return {Turn::Kind::kConverged, t, latest_checkpoint(store, t.global_epoch)};
    }
    if (t.site == rt.site_id) return {Turn::Kind::kTrain, t, latest_checkpoint(store, t.global_epoch)};
    if (std::chrono::steady_clock::now() >= deadline) {
      throw TimeoutError("site " + rt.site_id + " timed out waiting for its turn; token held by " + t.site +
                         " at epoch " + std::to_string(t.global_epoch));
    }
    std::this_thread::sleep_for(rt.options.poll_interval);
  }
}

EpochResult run_epoch(const SiteRuntime& rt, std::span<const std::uint8_t> from, std::uint32_t global_epoch) {
  const Checkpoint start = parse_checkpoint(from);
  if (start.global_epoch != global_epoch) {
    throw ProtocolError("checkpoint records " + std::to_string(start.global_epoch) +
                        " completed epochs but the token grants epoch " + std::to_string(global_epoch));
  }
  Restored r = restore(start, rt.spec, rt.adam);
  EpochResult out;
  out.report = train_epoch(r.network, r.adam, rt.data, rt.batch_size,
                           shuffle_seed(rt.master_seed, rt.site_id, global_epoch), global_epoch);
  std::vector<SiteEpoch> history = start.history;
  history.push_back({rt.site_id, global_epoch, out.report.validation_loss});
  out.converged = should_stop(rt, history, global_epoch);
  out.checkpoint = save_checkpoint(r.network, &r.adam, global_epoch + 1, std::move(history));
  return out;
}

TurnToken release_turn(const SiteRuntime& rt, const TurnToken& held, std::span<const std::uint8_t> trained,
                       double validation_loss) {
  ExchangeStore& store = store_of(rt);
  if (held.site != rt.site_id || held.status != TokenStatus::kRunning) {
    throw ProtocolError("site " + rt.site_id + " does not hold a running turn");
  }
  const Checkpoint c = parse_checkpoint(trained);
  if (c.global_epoch != held.global_epoch + 1 || c.history.empty() || c.history.back().site_id != rt.site_id ||
      c.history.back().epoch != held.global_epoch || c.history.back().validation_loss != validation_loss) {
    throw ProtocolError("trained checkpoint does not record epoch " + std::to_string(held.global_epoch) +
                        " of site " + rt.site_id);
  }

  store.put_atomic(checkpoint_name(held.global_epoch, rt.site_id), trained);
  if (rt.crash_hook) rt.crash_hook(CrashPoint::kAfterCheckpoint, held.global_epoch);

  // Appending is idempotent so a restarted worker does not duplicate rows.
  const std::string key = std::to_string(held.global_epoch) + "," + rt.site_id + ",";
  const auto existing = store.get(kLossLogName);
  std::string log = existing ? std::string(existing->begin(), existing->end())
                             : std::string("global_epoch,site_id,val_loss,utc_timestamp\n");
  if (log.find("\n" + key) == std::string::npos) {
    log += key + format_double(validation_loss) + "," + utc_timestamp() + "\n";
    store.put_atomic(kLossLogName, as_bytes(log));
  }
  if (rt.crash_hook) rt.crash_hook(CrashPoint::kAfterLossLog, held.global_epoch);

  TurnToken next{next_site(rt), held.global_epoch + 1,
                 should_stop(rt, c.history, held.global_epoch) ? TokenStatus::kConverged : TokenStatus::kRunning};
  if (!store.swap_token(held.serialize(), next.serialize())) {
    throw ProtocolError("token compare-and-swap failed for " + rt.site_id + " at epoch " +
                        std::to_string(held.global_epoch) + "; another worker mutated the token");
  }
  return next;
}

Bytes run_site_worker(const SiteRuntime& rt) {
  ExchangeStore& store = store_of(rt);
  try {
    for (;;) {
      Turn turn = acquire_turn(rt);
      if (turn.kind == Turn::Kind::kConverged) return std::move(turn.checkpoint);
      EpochResult r = run_epoch(rt, turn.checkpoint, turn.token.global_epoch);
      if (rt.crash_hook) rt.crash_hook(CrashPoint::kBeforeCheckpoint, turn.token.global_epoch);
      const TurnToken next = release_turn(rt, turn.token, r.checkpoint, r.report.validation_loss);
      if (rt.audit) {
        rt.audit({rt.site_id, turn.token.global_epoch, r.report.train_loss, r.report.validation_loss,
                  r.report.wall_seconds, next});
      }
      if (next.status == TokenStatus::kConverged) return std::move(r.checkpoint);
    }
  } catch (const ProtocolError&) {
    mark_aborted(store);
    throw;
  } catch (const TimeoutError&) {
    mark_aborted(store);
    throw;
  } catch (const NumericError&) {
    mark_aborted(store);
    throw;
  }
}

Bytes run_ssl(const SiteRuntime& site) {
  SiteRuntime rt = site;
  rt.roster = {site.site_id};
  rt.store = nullptr;
  Bytes current = initial_checkpoint(rt.spec, rt.adam, rt.master_seed);
  for (std::uint32_t epoch = 0;; ++epoch) {
    EpochResult r = run_epoch(rt, current, epoch);
    current = std::move(r.checkpoint);
    if (rt.audit) {
      rt.audit({rt.site_id, epoch, r.report.train_loss, r.report.validation_loss, r.report.wall_seconds,
                TurnToken{rt.site_id, epoch + 1, r.converged ? TokenStatus::kConverged : TokenStatus::kRunning}});
    }
    if (r.converged) return current;
  }
}

}  // namespace cwt
