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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Tolerances and budgets are fixed here.

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cwt/cdc_loss.hpp"
#include "cwt/checkpoint.hpp"
#include "cwt/convergence.hpp"
#include "cwt/error.hpp"
#include "cwt/experiment.hpp"
#include "cwt/metrics.hpp"
#include "cwt/nifti.hpp"
#include "cwt/ops.hpp"
#include "cwt/protocol.hpp"
#include "cwt/store.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace cwt;
namespace fs = std::filesystem;

namespace {

constexpr double kGradientTolerance = 1e-3;
constexpr std::size_t kGradientInstances = 100;
constexpr double kPearsonTolerance = 1e-12;
constexpr std::size_t kWilcoxonMaxExactN = 10;
constexpr double kMinDelta = 1e-4;
constexpr std::size_t kPatience = 10;
constexpr std::uint64_t kAnalogueSeeds[] = {1, 2, 3, 4, 5};
constexpr std::size_t kAnalogueRequiredWins = 4;

constexpr double kBudgetGradients = 120.0;
constexpr double kBudgetOracles = 60.0;
constexpr double kBudgetTrace = 600.0;
constexpr double kBudgetAnalogue = 3600.0;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path scratch_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("cwt_accept_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// ---- 1: gradients ----

void avoid(Tensor& t, std::initializer_list<float> kinks, float gap) {
  for (float& v : t.values()) {
    for (float k : kinks) {
      if (std::fabs(v - k) < gap) v = k + (v < k ? -gap : gap);
    }
  }
}

Tensor distinct_values(Shape shape, Rng& rng) {
  Tensor x(std::move(shape));
  std::vector<float> vals(x.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.1f * float(i) - 2.0f;
  rng.shuffle(std::span(vals));
  std::copy(vals.begin(), vals.end(), x.data());
  return x;
}

void gradients(Verdict& v) {
  using oracle::gradient_error;
  using oracle::random_tensor;
  using oracle::weighted_sum;
  constexpr float kStep = 1e-2f;
  std::map<std::string, double> worst;
  auto record = [&](const std::string& op, double err) {
    worst[op] = std::max(worst[op], err);
  };
  Rng rng(20261);
  for (std::size_t trial = 0; trial < kGradientInstances; ++trial) {
    {
      const auto pad = rng.below(2) ? ops::Padding::kSame : ops::Padding::kValid;
      const std::size_t k = 1 + 2 * rng.below(3);
      const std::size_t ci = 1 + rng.below(3), co = 1 + rng.below(3);
      Tensor in = random_tensor({ci, 5 + rng.below(3), 5 + rng.below(3)}, rng);
      Tensor w = random_tensor({co, ci, k, k}, rng);
      Tensor b = random_tensor({co}, rng);
      Tensor probe = random_tensor(ops::conv2d(in, w, b, pad).shape(), rng);
      const ops::ConvGrads g = ops::conv2d_backward(in, w, probe, pad);
      auto loss = [&] { return weighted_sum(ops::conv2d(in, w, b, pad), probe); };
      record("conv2d.input", gradient_error(in.values(), g.input.values(), loss, kStep));
      record("conv2d.kernels", gradient_error(w.values(), g.kernels.values(), loss, kStep));
      record("conv2d.bias", gradient_error(b.values(), g.bias.values(), loss, kStep));
    }
    for (auto kind : {ops::Activation::kRelu, ops::Activation::kSigmoid}) {
      Tensor x = random_tensor({2, 4, 4}, rng, -4.0, 4.0);
      avoid(x, {0.0f}, 0.05f);
      Tensor probe = random_tensor(x.shape(), rng);
      const Tensor g = ops::activation_backward(x, probe, kind);
      auto loss = [&] { return weighted_sum(ops::activation(x, kind), probe); };
      record(kind == ops::Activation::kRelu ? "relu" : "sigmoid", gradient_error(x.values(), g.values(), loss, kStep));
    }
    for (auto kind : {ops::PoolKind::kAvg, ops::PoolKind::kMax}) {
      const std::size_t k = 2 + rng.below(2);
      Tensor x = distinct_values({2, 6 + rng.below(3), 6 + rng.below(3)}, rng);
      Tensor probe = random_tensor(ops::pool2d(x, kind, k).shape(), rng);
      const Tensor g = ops::pool2d_backward(x, probe, kind, k);
      auto loss = [&] { return weighted_sum(ops::pool2d(x, kind, k), probe); };
      record(kind == ops::PoolKind::kAvg ? "avg_pool" : "max_pool", gradient_error(x.values(), g.values(), loss, kStep));
    }
    {
      const std::size_t k = 3 + 2 * rng.below(2);
      Tensor x = random_tensor({2, 5 + rng.below(3), 5 + rng.below(3)}, rng);
      Tensor probe = random_tensor(x.shape(), rng);
      const Tensor g = ops::avg_pool_same_backward(x, probe, k);
      auto loss = [&] { return weighted_sum(ops::avg_pool_same(x, k), probe); };
      record("avg_pool_same", gradient_error(x.values(), g.values(), loss, kStep));
    }
    {
      const std::size_t k = 2 + rng.below(2);
      Tensor x = random_tensor({2, 3, 2 + rng.below(3)}, rng);
      Tensor probe = random_tensor(ops::upsample2d(x, k).shape(), rng);
      const Tensor g = ops::upsample2d_backward(x, probe, k);
      auto loss = [&] { return weighted_sum(ops::upsample2d(x, k), probe); };
      record("upsample", gradient_error(x.values(), g.values(), loss, kStep));
    }
    {
      Tensor x = random_tensor({1, 5, 5}, rng, -40.0, 140.0);
      avoid(x, {0.0f, 100.0f}, 0.5f);
      Tensor probe = random_tensor(x.shape(), rng);
      const Tensor g = ops::intensity_window_backward(x, probe, 0.0f, 100.0f);
      auto loss = [&] { return weighted_sum(ops::intensity_window(x, 0.0f, 100.0f), probe); };
      record("window", gradient_error(x.values(), g.values(), loss, 0.1f));
    }
    {
      std::vector<Tensor> parts{random_tensor({1 + rng.below(2), 3, 3}, rng), random_tensor({1 + rng.below(3), 3, 3}, rng)};
      const std::size_t counts[] = {parts[0].extent(0), parts[1].extent(0)};
      Tensor probe = random_tensor(ops::concat_channels(parts).shape(), rng);
      const std::vector<Tensor> g = ops::concat_channels_backward(probe, counts);
      auto loss = [&] { return weighted_sum(ops::concat_channels(parts), probe); };
      for (std::size_t i = 0; i < 2; ++i) record("concat", gradient_error(parts[i].values(), g[i].values(), loss, kStep));
    }
    {
      Tensor p = random_tensor({1, 4, 5}, rng, 0.05, 0.95);
      Tensor t({1, 4, 5});
      for (float& x : t.values()) x = rng.uniform() < 0.4 ? 1.0f : 0.0f;
      const CdcResult r = cdc_loss(p, t);
      auto loss = [&] { return cdc_loss(p, t).loss; };
      record("cdc", gradient_error(p.values(), r.gradient.values(), loss, 1e-4f));
    }
  }
  double overall = 0.0;
  for (const auto& [op, err] : worst) {
    overall = std::max(overall, err);
    if (!(err < kGradientTolerance)) v.require(false, op + " error " + std::to_string(err));
  }
  v.detail << (v.pass ? "" : "; ") << worst.size() << " gradients x " << kGradientInstances
           << " instances, worst relative error " << overall;
}

// ---- 2: statistical oracles ----

void statistics(Verdict& v) {
  Rng rng(20262);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.below(300);
    std::vector<std::uint8_t> a(n), b(n);
    const double pa = rng.uniform(), pb = rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform() < pa;
      b[i] = rng.uniform() < pb;
    }
    mismatches += dice(a, b) != oracle::dice(a, b);
  }
  v.require(mismatches == 0, std::to_string(mismatches) + " dice mismatches");

  double pearson_gap = std::fabs(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 4}) -
                                 0.98198050606196585);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 3 + rng.below(60);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(0.0, 50000.0);
      y[i] = rng.uniform(-1.0, 1.0) * x[i] + rng.uniform(-9000.0, 9000.0);
    }
    pearson_gap = std::max(pearson_gap, std::fabs(pearson(x, y) - oracle::pearson(x, y)));
  }
  v.require(pearson_gap <= kPearsonTolerance, "pearson gap " + std::to_string(pearson_gap));

  std::size_t wilcoxon_cases = 0, wilcoxon_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(kWilcoxonMaxExactN);
    std::vector<double> a(n), b(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = double(rng.below(7)) / 8.0;
      b[i] = double(rng.below(7)) / 8.0;
      d[i] = a[i] - b[i];
    }
    const oracle::SignRankOracle want = oracle::signed_rank_bruteforce(d);
    if (want.n == 0) continue;
    const WilcoxonResult got = wilcoxon_signed_rank(oracle::paired(a, b));
    ++wilcoxon_cases;
    wilcoxon_bad += !(got.exact && got.p_value == want.p_value && got.w_plus == want.w_plus &&
                      got.w_minus == want.w_minus);
  }
  v.require(wilcoxon_bad == 0, std::to_string(wilcoxon_bad) + " wilcoxon mismatches");
  v.detail << (v.pass ? "" : "; ") << "dice exact, pearson max gap " << pearson_gap << ", wilcoxon "
           << wilcoxon_cases << " exact p-values of n<=" << kWilcoxonMaxExactN << " equal to enumeration";
}

// ---- 3: protocol trace ----

void protocol_trace(Verdict& v) {
  const ExperimentConfig c = profile_config("ci");
  const auto data = fixture::materialize_all(c);
  MemoryStore inner;
  std::mutex mutex;
  std::vector<std::string> writes;
  std::vector<std::string> foreign;
  ObservedStore store(inner, [&](const std::string& name, std::span<const std::uint8_t> bytes) {
    std::lock_guard lock(mutex);
    writes.push_back(name);
    const bool allowed = name == "token" || name == kLossLogName ||
                         (name.rfind("checkpoints/", 0) == 0 && name.size() > 17 &&
                          name.compare(name.size() - 5, 5, ".ckpt") == 0);
    if (!allowed) foreign.push_back(name);
    if (name.rfind("checkpoints/", 0) == 0) {
      try {
        parse_checkpoint(bytes);
      } catch (const Error&) {
        foreign.push_back(name + " (not a checkpoint)");
      }
    }
  });
  fixture::AuditLog log;
  const Bytes final = train_msl(c, data, store, log.callback());
  const std::vector<AuditRecord>& records = log.records;
  std::vector<AuditRecord> sorted = records;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.epoch < b.epoch; });
  const std::vector<std::string> roster = c.roster();
  bool alternating = !sorted.empty();
  for (std::size_t e = 0; e < sorted.size(); ++e) {
    alternating &= sorted[e].epoch == e && sorted[e].site == roster[e % roster.size()];
  }
  v.require(alternating, "audit sequence is not alternating with contiguous epochs");
  std::set<std::string> checkpoints;
  std::size_t checkpoint_writes = 0;
  for (const std::string& n : inner.list()) {
    if (n.rfind("checkpoints/epoch_", 0) == 0) checkpoints.insert(n);
  }
  for (const std::string& n : writes) checkpoint_writes += n.rfind("checkpoints/epoch_", 0) == 0;
  v.require(checkpoints.size() == sorted.size() && checkpoint_writes == sorted.size(),
            "checkpoints " + std::to_string(checkpoints.size()) + " (writes " + std::to_string(checkpoint_writes) +
                ") for " + std::to_string(sorted.size()) + " epochs");
  for (std::size_t e = 0; e < sorted.size(); ++e) {
    v.require(checkpoints.count(checkpoint_name(std::uint32_t(e), sorted[e].site)) == 1,
              "missing checkpoint for epoch " + std::to_string(e));
  }
  v.require(foreign.empty(), "foreign store writes: " + (foreign.empty() ? std::string() : foreign.front()));
  const Checkpoint parsed = parse_checkpoint(final);
  v.require(parsed.global_epoch == sorted.size(), "final checkpoint epoch disagrees with audit");
  v.require(!sorted.empty() && sorted.back().next.status == TokenStatus::kConverged, "run did not converge");
  v.detail << (v.pass ? "" : "; ") << sorted.size() << " epochs over " << roster.size() << " sites, "
           << writes.size() << " store writes, all token/checkpoint/loss-log";
}

// ---- 4: crash tolerance ----

struct TraceRun {
  std::vector<std::string> audit;
  Bytes final;
  std::size_t crashes = 0;
};

TraceRun two_site_run(const ExperimentConfig& c, const std::vector<SiteData>& data, std::optional<CrashPoint> point,
                      const std::string& crash_site, std::uint32_t crash_epoch) {
  MemoryStore store;
  fixture::AuditLog log;
  init_msl(store, c.roster(), initial_checkpoint(c.architecture(), c.adam, c.master_seed));
  std::atomic<std::size_t> crashes{0};
  std::vector<Bytes> results(data.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < data.size(); ++i) {
    SiteRuntime rt = make_runtime(c, data[i], &store, log.callback());
    if (point && rt.site_id == crash_site) {
      rt.crash_hook = [&crashes, p = *point, crash_epoch](CrashPoint at, std::uint32_t epoch) {
        if (at == p && epoch == crash_epoch && crashes.load() == 0) {
          ++crashes;
          throw SimulatedCrash{at, epoch};
        }
      };
    }
    threads.emplace_back([&results, i, rt] {
      for (;;) {
        try {
          results[i] = run_site_worker(rt);
          return;
        } catch (const SimulatedCrash&) {
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (results[0] != results[1]) return {{}, {}, crashes.load()};
  return {log.lines(), results[0], crashes.load()};
}

void crash_tolerance(Verdict& v) {
  ExperimentConfig c = fixture::tiny_experiment(41);
  c.protocol.max_epochs = 8;
  c.protocol.patience = 4;
  const auto data = fixture::materialize_all(c);
  const TraceRun clean = two_site_run(c, data, std::nullopt, "", 0);
  v.require(clean.audit.size() >= 6, "clean run too short to crash mid-way");
  std::size_t scenarios = 0;
  const std::pair<const char*, std::uint32_t> targets[] = {{"A", 2}, {"B", 3}};
  for (const auto& [site, epoch] : targets) {
    for (CrashPoint p : {CrashPoint::kBeforeCheckpoint, CrashPoint::kAfterCheckpoint, CrashPoint::kAfterLossLog}) {
      const TraceRun r = two_site_run(c, data, p, site, epoch);
      const std::string tag = std::string(site) + "@" + std::to_string(epoch) + "/point " + std::to_string(int(p));
      v.require(r.crashes == 1, tag + ": crash not injected");
      v.require(r.audit == clean.audit, tag + ": audit differs from the clean run");
      v.require(r.final == clean.final, tag + ": final checkpoint differs");
      ++scenarios;
    }
  }
  v.detail << (v.pass ? "" : "; ") << scenarios << " crash/restart scenarios reproduce the " << clean.audit.size()
           << "-epoch clean audit";
}

// ---- 5: SSL/MSL equivalence ----

void ssl_equivalence(Verdict& v) {
  ExperimentConfig c = profile_config("ci");
  c.sites.resize(1);
  const SiteData site = materialize_site(c, c.sites[0].id);
  const Bytes local = train_ssl(c, site);
  MemoryStore store;
  const Bytes shared = train_msl(c, {site}, store);
  const Checkpoint a = parse_checkpoint(local), b = parse_checkpoint(shared);
  v.require(a.tensors == b.tensors, "final weights differ");
  v.require(local == shared, "checkpoint bytes differ");
  v.detail << (v.pass ? "" : "; ") << "site " << site.id << ", " << a.global_epoch << " epochs, "
           << local.size() << " identical bytes";
}

// ---- 6: checkpoint format ----

void checkpoint_format(Verdict& v) {
  const ExperimentConfig c = profile_config("ci");
  const ArchitectureSpec spec = c.architecture();
  Network net = Network::build(spec, 99);
  AdamState adam{c.adam, net.parameters()};
  std::vector<Tensor> grads = net.zero_gradients();
  Rng rng(20266);
  for (auto& g : grads) {
    for (float& x : g.values()) x = float(rng.uniform(-0.1, 0.1));
  }
  adam_step(net.parameters(), grads, adam);
  const std::vector<SiteEpoch> history{{"NIH", 0, 0.75}, {"VUMC", 1, 0.5}};
  const Bytes first = save_checkpoint(net, &adam, 2, history);
  const Restored r = load_checkpoint(first, spec, c.adam);
  const Bytes second = save_checkpoint(r.network, &r.adam, 2, history);
  v.require(first == second, "save-load-save changed bytes");

  const ArchitectureSpec small =
      parse_architecture("cwt-architecture 1\ninput_channels 1\nconv 2 3\nrelu\nconv 1 1\nsigmoid\n");
  const Bytes tiny = save_checkpoint(Network::build(small, 3), nullptr, 1, {{"A", 0, 0.5}});
  std::size_t undetected = 0, flips = 0;
  for (std::size_t i = 0; i < tiny.size(); ++i) {
    for (std::uint8_t mask : {std::uint8_t{0x01}, std::uint8_t{0x80}, std::uint8_t{0xff}}) {
      Bytes bad = tiny;
      bad[i] ^= mask;
      ++flips;
      try {
        parse_checkpoint(bad);
        ++undetected;
      } catch (const ParseError&) {
      }
    }
  }
  for (int trial = 0; trial < 200; ++trial) {
    Bytes bad = first;
    bad[rng.below(bad.size())] ^= std::uint8_t(1 + rng.below(255));
    ++flips;
    try {
      parse_checkpoint(bad);
      ++undetected;
    } catch (const ParseError&) {
    }
  }
  v.require(undetected == 0, std::to_string(undetected) + " corruptions undetected");

  bool rejected = false;
  try {
    load_checkpoint(first, profile_config("paper").architecture(), c.adam);
  } catch (const IncompatibleError&) {
    rejected = true;
  }
  try {
    load_checkpoint(tiny, spec, c.adam);
    rejected = false;
  } catch (const IncompatibleError&) {
  }
  v.require(rejected, "cross-architecture load not rejected");
  v.detail << (v.pass ? "" : "; ") << first.size() << "-byte round trip identical, " << flips
           << " corruptions detected, cross-architecture loads rejected";
}

// ---- 7: multi-site analogue ----

void multi_site_analogue(Verdict& v) {
  std::size_t wins = 0;
  double msl_sum = 0.0, best_ssl_sum = 0.0;
  for (std::uint64_t seed : kAnalogueSeeds) {
    ExperimentConfig c = profile_config("ci");
    c.master_seed = seed;
    const auto data = fixture::materialize_all(c);
    std::vector<ModelCheckpoint> models;
    for (const SiteData& s : data) models.push_back({"ssl_" + s.id, train_ssl(c, s)});
    MemoryStore store;
    models.push_back({"msl", train_msl(c, data, store)});
    const EvaluationReport report = evaluate(c, models, data);
    double best_ssl = 0.0;
    std::ostringstream row;
    for (const ModelCheckpoint& m : models) {
      const double d = report.pooled_for(m.name).mean_dice;
      row << " " << m.name << "=" << d;
      if (m.name != "msl") best_ssl = std::max(best_ssl, d);
    }
    const double msl = report.pooled_for("msl").mean_dice;
    wins += msl >= best_ssl;
    msl_sum += msl;
    best_ssl_sum += best_ssl;
    std::printf("  seed %llu:%s -> %s\n", static_cast<unsigned long long>(seed), row.str().c_str(),
                msl >= best_ssl ? "msl >= best ssl" : "msl < best ssl");
    std::fflush(stdout);
  }
  const double n = double(std::size(kAnalogueSeeds));
  v.require(wins >= kAnalogueRequiredWins, "msl matched the best ssl in " + std::to_string(wins) + " of " +
                                               std::to_string(std::size(kAnalogueSeeds)) + " seeds");
  v.require(msl_sum > best_ssl_sum, "mean msl dice not above mean best ssl dice");
  v.detail << (v.pass ? "" : "; ") << "wins " << wins << "/" << std::size(kAnalogueSeeds) << ", mean msl "
           << msl_sum / n << " vs mean best ssl " << best_ssl_sum / n;
}

// ---- 8: convergence rule ----

// Index of the observation at which the monitor first reports convergence.
std::optional<std::size_t> firing_epoch(const std::vector<double>& stream) {
  ConvergenceMonitor m(kMinDelta, kPatience);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (m.observe(stream[i])) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> replay_firing_epoch(const std::vector<double>& stream) {
  std::vector<SiteEpoch> history;
  const std::vector<std::string> roster{"A", "B"};
  for (std::size_t i = 0; i < stream.size(); ++i) {
    history.push_back({roster[i % 2], std::uint32_t(i), stream[i]});
    if (history_converged(history, ConvergenceMode::kGlobal, kMinDelta, kPatience, roster)) return i;
  }
  return std::nullopt;
}

void convergence_rule(Verdict& v) {
  struct Stream {
    std::string name;
    std::vector<double> losses;
    std::optional<std::size_t> fires;
  };
  auto flat = [](double head, std::size_t n) { return std::vector<double>(n, head); };
  std::vector<Stream> streams;
  streams.push_back({"flat", flat(1.0, 20), 10});
  {
    std::vector<double> s{1.0, 0.9, 0.8, 0.7, 0.6};
    for (int i = 0; i < 15; ++i) s.push_back(0.6);
    streams.push_back({"improve then plateau", s, 14});
  }
  {
    const double best = 0.5;
    std::vector<double> s{best};
    for (int i = 0; i < 12; ++i) s.push_back(best - kMinDelta);
    streams.push_back({"exact min_delta improvement", s, 10});
  }
  {
    const double best = 0.5;
    std::vector<double> s{best, best - 1.5 * kMinDelta};
    for (int i = 0; i < 12; ++i) s.push_back(best - 1.5 * kMinDelta);
    streams.push_back({"just over min_delta", s, 11});
  }
  {
    std::vector<double> s{1.0};
    for (int i = 0; i < 8; ++i) s.push_back(1.5);
    s.push_back(0.5);
    for (int i = 0; i < 12; ++i) s.push_back(0.5);
    streams.push_back({"late improvement resets", s, 19});
  }
  {
    std::vector<double> s;
    for (int i = 0; i < 30; ++i) s.push_back(1.0 - 2e-4 * i);
    streams.push_back({"steady improvement", s, std::nullopt});
  }
  {
    std::vector<double> s{1.0};
    for (int i = 0; i < 9; ++i) s.push_back(1.0);
    streams.push_back({"nine stalls", s, std::nullopt});
  }
  for (const Stream& s : streams) {
    const auto got = firing_epoch(s.losses);
    const auto replay = replay_firing_epoch(s.losses);
    auto show = [](std::optional<std::size_t> e) { return e ? std::to_string(*e) : std::string("never"); };
    v.require(got == s.fires, s.name + ": monitor fired at " + show(got) + ", expected " + show(s.fires));
    v.require(replay == s.fires, s.name + ": history replay fired at " + show(replay));
  }
  v.detail << (v.pass ? "" : "; ") << streams.size() << " constructed streams fire at the expected epoch"
           << " (min_delta " << kMinDelta << ", patience " << kPatience << ")";
}

// ---- 9: NIfTI ----

template <typename T>
void poke(Bytes& b, std::size_t offset, T value) {
  std::memcpy(b.data() + offset, &value, sizeof(T));
}

std::string failing_field(const Bytes& b) {
  try {
    parse_nifti(b);
  } catch (const ParseError& e) {
    return e.field();
  }
  return "<accepted>";
}

void nifti_round_trip(Verdict& v) {
  std::size_t volumes = 0;
  for (const char* profile : {"ci", "paper"}) {
    const ExperimentConfig c = profile_config(profile);
    for (const SiteConfig& s : c.sites) {
      SitePhantomParams p = *s.phantom;
      p.seed = phantom_seed(c.master_seed, s.id);
      p.volume_count = s.train_count + s.test_count;
      for (std::size_t i = 0; i < p.volume_count; ++i) {
        const Phantom ph = generate_phantom(p, i);
        const VolumeImage image = parse_nifti(write_nifti(ph.image));
        const SegmentationMask mask = parse_nifti_mask(write_nifti(ph.mask));
        const bool same = image.dims == ph.image.dims && image.spacing_mm == ph.image.spacing_mm &&
                          image.voxels == ph.image.voxels && mask == ph.mask;
        v.require(same, std::string(profile) + " " + s.id + " volume " + std::to_string(i) + " changed");
        ++volumes;
      }
    }
  }
  {
    const ExperimentConfig c = profile_config("ci");
    const fs::path dir = scratch_dir("nifti");
    generate_data(c, dir);
    for (const SiteConfig& s : c.sites) {
      const SiteData mem = materialize_site(c, s.id), disk = load_site(c, dir, s.id);
      bool same = mem.train.size() == disk.train.size() && mem.test.size() == disk.test.size();
      for (std::size_t i = 0; same && i < mem.train.size(); ++i) {
        same = *mem.train[i].image == *disk.train[i].image && *mem.train[i].mask == *disk.train[i].mask;
      }
      for (std::size_t i = 0; same && i < mem.test.size(); ++i) {
        same = *mem.test[i].image == *disk.test[i].image && *mem.test[i].mask == *disk.test[i].mask;
      }
      v.require(same, "files written for site " + s.id + " do not reload exactly");
    }
    fs::remove_all(dir);
  }

  VolumeImage sample({3, 2, 2}, {0.5f, 0.75f, 5.0f});
  for (std::size_t i = 0; i < sample.voxels.size(); ++i) sample.voxels[i] = float(i) - 4.5f;
  const Bytes good = write_nifti(sample);
  struct Corruption {
    std::string field;
    std::function<void(Bytes&)> apply;
  };
  const std::vector<Corruption> corruptions{
      {"sizeof_hdr", [](Bytes& b) { poke<std::int32_t>(b, 0, 540); }},
      {"magic", [](Bytes& b) { std::memcpy(b.data() + 344, "ni1\0", 4); }},
      {"dim[0]", [](Bytes& b) { poke<std::int16_t>(b, 40, 9); }},
      {"dim[1]", [](Bytes& b) { poke<std::int16_t>(b, 42, -3); }},
      {"datatype", [](Bytes& b) { poke<std::int16_t>(b, 70, 1024); }},
      {"bitpix", [](Bytes& b) { poke<std::int16_t>(b, 72, 64); }},
      {"pixdim[1]", [](Bytes& b) { poke<float>(b, 80, 0.0f); }},
      {"vox_offset", [](Bytes& b) { poke<float>(b, 108, 12.0f); }},
      {"scl_slope", [](Bytes& b) { poke<float>(b, 112, std::numeric_limits<float>::infinity()); }},
      {"data", [](Bytes& b) { b.resize(b.size() - 3); }},
      {"sizeof_hdr", [](Bytes& b) { b.resize(200); }},
  };
  for (const Corruption& k : corruptions) {
    Bytes b = good;
    k.apply(b);
    const std::string got = failing_field(b);
    v.require(got == k.field, "expected field " + k.field + ", got " + got);
  }
  v.detail << (v.pass ? "" : "; ") << volumes << " phantoms round-trip exactly, " << corruptions.size()
           << " malformed headers name their field";
}

struct Criterion {
  int number;
  const char* title;
  double budget_s;  // 0: no budget
  std::function<void(Verdict&)> run;
};

}  // namespace

// Optional arguments select criteria by number; the default runs all.
int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  const std::vector<Criterion> criteria{
      {1, "gradient suite", kBudgetGradients, gradients},
      {2, "statistical oracles", kBudgetOracles, statistics},
      {3, "protocol trace", kBudgetTrace, protocol_trace},
      {4, "crash tolerance", 0.0, crash_tolerance},
      {5, "ssl/msl equivalence", 0.0, ssl_equivalence},
      {6, "checkpoint format", 0.0, checkpoint_format},
      {7, "multi-site analogue", kBudgetAnalogue, multi_site_analogue},
      {8, "convergence rule", 0.0, convergence_rule},
      {9, "nifti round trip", 0.0, nifti_round_trip},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    Verdict v;
    const Stopwatch clock;
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double elapsed = clock.seconds();
    if (c.budget_s > 0.0) {
      v.require(elapsed < c.budget_s, "over the " + std::to_string(int(c.budget_s)) + " s budget");
    }
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", c.number, c.title,
                v.detail.str().c_str(), elapsed);
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
