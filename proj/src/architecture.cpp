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

#include "cwt/architecture.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "cwt/error.hpp"

namespace cwt {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string format_float(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

std::string render(const LayerDesc& d);

std::string render_branch(const std::vector<LayerDesc>& branch) {
  std::string s = "branch";
  for (std::size_t i = 0; i < branch.size(); ++i) {
    s += i == 0 ? " " : " | ";
    s += render(branch[i]);
  }
  return s;
}

std::string render(const LayerDesc& d) {
  return std::visit(
      Overloaded{
          [](const ConvDesc& c) {
            return "conv " + std::to_string(c.out_channels) + " " +
                   std::to_string(c.kernel);
          },
          [](const ReluDesc&) { return std::string("relu"); },
          [](const SigmoidDesc&) { return std::string("sigmoid"); },
          [](const PoolDesc& p) {
            return std::string(p.kind == ops::PoolKind::kAvg ? "avgpool " : "maxpool ") +
                   std::to_string(p.k);
          },
          [](const AvgPoolSameDesc& p) { return "avgpool_same " + std::to_string(p.k); },
          [](const UpsampleDesc& u) { return "upsample " + std::to_string(u.k); },
          [](const WindowDesc& w) {
            return "window " + format_float(w.lo) + " " + format_float(w.hi);
          },
          [](const InceptionDesc& inc) {
            std::string s = "inception";
            for (const auto& b : inc.branches) s += "\n" + render_branch(b);
            return s + "\nend";
          },
      },
      d.op);
}

// Channel bookkeeping shared by validation and network construction.
struct Walker {
  std::string path;

  [[noreturn]] void fail(const std::string& where, const std::string& why) const {
    throw ValidationError("architecture " + where + ": " + why);
  }

  std::size_t simple(const LayerDesc& d, std::size_t channels,
                     const std::string& where, bool in_branch) const {
    return std::visit(
        Overloaded{
            [&](const ConvDesc& c) -> std::size_t {
              if (c.out_channels == 0) fail(where, "conv out_channels must be >= 1");
              if (c.kernel == 0 || c.kernel % 2 == 0) {
                fail(where, "conv kernel " + std::to_string(c.kernel) + " must be odd");
              }
              return c.out_channels;
            },
            [&](const ReluDesc&) { return channels; },
            [&](const SigmoidDesc&) { return channels; },
            [&](const PoolDesc& p) -> std::size_t {
              if (in_branch) fail(where, "strided pooling is not allowed inside an inception branch");
              if (p.k == 0) fail(where, "pool window must be >= 1");
              return channels;
            },
            [&](const AvgPoolSameDesc& p) -> std::size_t {
              if (p.k == 0 || p.k % 2 == 0) {
                fail(where, "avgpool_same window " + std::to_string(p.k) + " must be odd");
              }
              return channels;
            },
            [&](const UpsampleDesc& u) -> std::size_t {
              if (in_branch) fail(where, "upsample is not allowed inside an inception branch");
              if (u.k == 0) fail(where, "upsample factor must be >= 1");
              return channels;
            },
            [&](const WindowDesc& w) -> std::size_t {
              if (!std::isfinite(w.lo) || !std::isfinite(w.hi) || !(w.lo < w.hi)) {
                fail(where, "window requires finite lo < hi");
              }
              return channels;
            },
            [&](const InceptionDesc&) -> std::size_t {
              fail(where, "nested inception blocks are not supported");
            },
        },
        d.op);
  }
};

std::size_t walk_layers(const ArchitectureSpec& spec) {
  Walker w;
  std::size_t channels = spec.input_channels;
  std::size_t down = 1, up = 1;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const std::string where = "layers[" + std::to_string(i) + "]";
    const LayerDesc& d = spec.layers[i];
    if (const auto* inc = std::get_if<InceptionDesc>(&d.op)) {
      if (inc->branches.empty()) w.fail(where, "inception block needs at least one branch");
      std::size_t total = 0;
      for (std::size_t b = 0; b < inc->branches.size(); ++b) {
        const auto& branch = inc->branches[b];
        if (branch.empty()) {
          w.fail(where + " inception branch[" + std::to_string(b) + "]", "branch is empty");
        }
        std::size_t c = channels;
        for (std::size_t j = 0; j < branch.size(); ++j) {
          c = w.simple(branch[j], c,
                       where + " inception branch[" + std::to_string(b) + "][" +
                           std::to_string(j) + "]",
                       true);
        }
        total += c;
      }
      channels = total;
      continue;
    }
    if (const auto* p = std::get_if<PoolDesc>(&d.op)) down *= std::max<std::size_t>(p->k, 1);
    if (const auto* u = std::get_if<UpsampleDesc>(&d.op)) up *= std::max<std::size_t>(u->k, 1);
    channels = w.simple(d, channels, where, false);
  }
  if (down != up) {
    w.fail("layers", "pooling factor " + std::to_string(down) +
                         " is not undone by upsampling factor " + std::to_string(up) +
                         "; output would not match input extents");
  }
  return channels;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

struct LineParser {
  std::size_t offset;

  [[noreturn]] void fail(const std::string& field, const std::string& why) const {
    throw ParseError("architecture", field, offset, why);
  }

  std::size_t count(std::string_view tok, const std::string& field) const {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      fail(field, "expected an unsigned integer, got '" + std::string(tok) + "'");
    }
    return v;
  }

  float real(std::string_view tok, const std::string& field) const {
    const std::string s(tok);
    char* end = nullptr;
    const float v = std::strtof(s.c_str(), &end);
    if (end != s.c_str() + s.size()) fail(field, "expected a number, got '" + s + "'");
    return v;
  }

  LayerDesc simple(const std::vector<std::string_view>& t) const {
    const std::string_view op = t.at(0);
    auto want = [&](std::size_t n) {
      if (t.size() != n + 1) {
        fail(std::string(op), "expected " + std::to_string(n) + " argument(s)");
      }
    };
    if (op == "conv") {
      want(2);
      return layers::conv(count(t[1], "conv.out_channels"), count(t[2], "conv.kernel"));
    }
    if (op == "relu") { want(0); return layers::relu(); }
    if (op == "sigmoid") { want(0); return layers::sigmoid(); }
    if (op == "avgpool") { want(1); return layers::avgpool(count(t[1], "avgpool.k")); }
    if (op == "maxpool") { want(1); return layers::maxpool(count(t[1], "maxpool.k")); }
    if (op == "avgpool_same") {
      want(1);
      return layers::avgpool_same(count(t[1], "avgpool_same.k"));
    }
    if (op == "upsample") { want(1); return layers::upsample(count(t[1], "upsample.k")); }
    if (op == "window") {
      want(2);
      return layers::window(real(t[1], "window.lo"), real(t[2], "window.hi"));
    }
    fail("descriptor", "unknown descriptor '" + std::string(op) + "'");
  }
};

}  // namespace

void validate(const ArchitectureSpec& spec) {
  if (spec.input_channels == 0) {
    throw ValidationError("architecture input_channels must be >= 1");
  }
  if (spec.layers.size() < 2) {
    throw ValidationError("architecture must end with conv 1 1 followed by sigmoid");
  }
  const auto& last = spec.layers.back();
  const auto& penult = spec.layers[spec.layers.size() - 2];
  const auto* head = std::get_if<ConvDesc>(&penult.op);
  if (!std::holds_alternative<SigmoidDesc>(last.op) || head == nullptr ||
      head->out_channels != 1 || head->kernel != 1) {
    throw ValidationError("architecture layers[" +
                          std::to_string(spec.layers.size() - 2) +
                          "..]: final descriptors must be 'conv 1 1' then 'sigmoid'");
  }
  walk_layers(spec);
}

std::string canonical_text(const ArchitectureSpec& spec) {
  std::string s = "cwt-architecture 1\ninput_channels " +
                  std::to_string(spec.input_channels) + "\n";
  for (const auto& d : spec.layers) s += render(d) + "\n";
  return s;
}

ArchitectureSpec parse_architecture(std::string_view text) {
  ArchitectureSpec spec;
  bool header = false;
  bool have_channels = false;
  InceptionDesc* open = nullptr;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    const LineParser lp{pos};
    pos = eol + 1;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const auto tokens = split_ws(line);
    if (tokens.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    if (!header) {
      if (tokens.size() != 2 || tokens[0] != "cwt-architecture" || tokens[1] != "1") {
        lp.fail("header", "expected 'cwt-architecture 1'");
      }
      header = true;
      continue;
    }
    if (tokens[0] == "input_channels") {
      if (tokens.size() != 2) lp.fail("input_channels", "expected 1 argument");
      spec.input_channels = lp.count(tokens[1], "input_channels");
      have_channels = true;
      continue;
    }
    if (tokens[0] == "inception") {
      if (open) lp.fail("inception", "nested inception blocks are not supported");
      spec.layers.push_back(layers::inception({}));
      open = &std::get<InceptionDesc>(spec.layers.back().op);
      continue;
    }
    if (tokens[0] == "branch") {
      if (!open) lp.fail("branch", "'branch' outside an inception block");
      std::vector<LayerDesc> branch;
      std::vector<std::string_view> current;
      for (std::size_t i = 1; i <= tokens.size(); ++i) {
        if (i == tokens.size() || tokens[i] == "|") {
          if (current.empty()) lp.fail("branch", "empty descriptor in branch");
          branch.push_back(lp.simple(current));
          current.clear();
        } else {
          current.push_back(tokens[i]);
        }
      }
      open->branches.push_back(std::move(branch));
      continue;
    }
    if (tokens[0] == "end") {
      if (!open) lp.fail("end", "'end' without an open inception block");
      open = nullptr;
      continue;
    }
    if (open) lp.fail(std::string(tokens[0]), "expected 'branch' or 'end' inside inception");
    spec.layers.push_back(lp.simple(tokens));
  }
  if (!header) throw ParseError("architecture", "header", 0, "missing 'cwt-architecture 1'");
  if (!have_channels) {
    throw ParseError("architecture", "input_channels", text.size(), "missing input_channels");
  }
  if (open) throw ParseError("architecture", "end", text.size(), "unterminated inception block");
  return spec;
}

Digest architecture_hash(const ArchitectureSpec& spec) {
  return sha256(canonical_text(spec));
}

std::size_t spatial_multiple(const ArchitectureSpec& spec) {
  std::size_t m = 1;
  for (const auto& d : spec.layers) {
    if (const auto* p = std::get_if<PoolDesc>(&d.op)) m *= p->k;
  }
  return m;
}

LayerDesc modified_inception(std::size_t w) {
  using namespace layers;
  return inception({
      {conv(w, 1), relu()},
      {conv(w, 1), relu(), conv(w, 3), relu()},
      {conv(w, 1), relu(), conv(w, 5), relu()},
      {avgpool_same(3), conv(w, 1), relu()},
  });
}

ArchitectureSpec reference_architecture(std::size_t width_divisor) {
  using namespace layers;
  const std::size_t d = std::max<std::size_t>(width_divisor, 1);
  auto width = [d](std::size_t n) { return std::max<std::size_t>(n / d, 1); };
  ArchitectureSpec spec;
  spec.input_channels = 1;
  spec.layers = {
      window(0.0f, 100.0f),
      conv(width(32), 3), relu(),
      modified_inception(width(16)),
      conv(width(64), 3), relu(),
      modified_inception(width(16)),
      conv(width(32), 3), relu(),
      conv(1, 1), sigmoid(),
  };
  return spec;
}

}  // namespace cwt
