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

#include "cwt/network.hpp"

#include <cmath>
#include <string>

#include "cwt/error.hpp"
#include "cwt/ops.hpp"
#include "cwt/rng.hpp"

namespace cwt {
namespace {

struct Node {
  enum class Kind { kConv, kActivation, kPool, kAvgPoolSame, kUpsample, kWindow, kInception };
  Kind kind = Kind::kConv;
  std::size_t weight = 0;  // parameter indices (conv only)
  std::size_t bias = 0;
  std::size_t k = 0;
  ops::Activation activation = ops::Activation::kRelu;
  ops::PoolKind pool = ops::PoolKind::kMax;
  float lo = 0.0f, hi = 1.0f;
  std::vector<std::vector<Node>> branches;
  std::vector<std::size_t> branch_channels;
};

struct ParamSpec {
  std::string name;
  Shape shape;
  std::size_t fan_in = 0;  // zero for biases
};

class Compiler {
 public:
  std::vector<ParamSpec> params;

  std::vector<Node> compile(const std::vector<LayerDesc>& layers, std::size_t& channels,
                            const std::string& prefix) {
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      nodes.push_back(compile_one(layers[i], channels, prefix + std::to_string(i)));
    }
    return nodes;
  }

 private:
  Node compile_one(const LayerDesc& d, std::size_t& channels, const std::string& name) {
    Node n;
    if (const auto* c = std::get_if<ConvDesc>(&d.op)) {
      n.kind = Node::Kind::kConv;
      n.k = c->kernel;
      n.weight = params.size();
      params.push_back({name + ".conv.weight",
                        {c->out_channels, channels, c->kernel, c->kernel},
                        channels * c->kernel * c->kernel});
      n.bias = params.size();
      params.push_back({name + ".conv.bias", {c->out_channels}, 0});
      channels = c->out_channels;
    } else if (std::holds_alternative<ReluDesc>(d.op)) {
      n.kind = Node::Kind::kActivation;
      n.activation = ops::Activation::kRelu;
    } else if (std::holds_alternative<SigmoidDesc>(d.op)) {
      n.kind = Node::Kind::kActivation;
      n.activation = ops::Activation::kSigmoid;
    } else if (const auto* p = std::get_if<PoolDesc>(&d.op)) {
      n.kind = Node::Kind::kPool;
      n.pool = p->kind;
      n.k = p->k;
    } else if (const auto* a = std::get_if<AvgPoolSameDesc>(&d.op)) {
      n.kind = Node::Kind::kAvgPoolSame;
      n.k = a->k;
    } else if (const auto* u = std::get_if<UpsampleDesc>(&d.op)) {
      n.kind = Node::Kind::kUpsample;
      n.k = u->k;
    } else if (const auto* w = std::get_if<WindowDesc>(&d.op)) {
      n.kind = Node::Kind::kWindow;
      n.lo = w->lo;
      n.hi = w->hi;
    } else {
      const auto& inc = std::get<InceptionDesc>(d.op);
      n.kind = Node::Kind::kInception;
      std::size_t total = 0;
      for (std::size_t b = 0; b < inc.branches.size(); ++b) {
        std::size_t c = channels;
        n.branches.push_back(compile(inc.branches[b], c, name + ".b" + std::to_string(b) + "."));
        n.branch_channels.push_back(c);
        total += c;
      }
      channels = total;
    }
    return n;
  }
};

void accumulate(Tensor& into, const Tensor& add) {
  float* d = into.data();
  const float* s = add.data();
  for (std::size_t i = 0; i < into.size(); ++i) d[i] += s[i];
}

Tensor run(const std::vector<Node>& nodes, Tensor x, std::span<const Tensor> params,
           Tape* tape);

Tensor apply(const Node& n, const Tensor& x, std::span<const Tensor> params,
             Tape::Entry* entry) {
  switch (n.kind) {
    case Node::Kind::kConv:
      return ops::conv2d(x, params[n.weight], params[n.bias], ops::Padding::kSame);
    case Node::Kind::kActivation:
      return ops::activation(x, n.activation);
    case Node::Kind::kPool:
      return ops::pool2d(x, n.pool, n.k);
    case Node::Kind::kAvgPoolSame:
      return ops::avg_pool_same(x, n.k);
    case Node::Kind::kUpsample:
      return ops::upsample2d(x, n.k);
    case Node::Kind::kWindow:
      return ops::intensity_window(x, n.lo, n.hi);
    case Node::Kind::kInception: {
      std::vector<Tensor> outs;
      outs.reserve(n.branches.size());
      if (entry) entry->branches.resize(n.branches.size());
      for (std::size_t b = 0; b < n.branches.size(); ++b) {
        outs.push_back(run(n.branches[b], x, params, entry ? &entry->branches[b] : nullptr));
      }
      return ops::concat_channels(outs);
    }
  }
  throw ContractViolation("network: unknown node kind");
}

Tensor run(const std::vector<Node>& nodes, Tensor x, std::span<const Tensor> params,
           Tape* tape) {
  if (tape) {
    tape->entries.clear();
    tape->entries.reserve(nodes.size());
  }
  for (const Node& n : nodes) {
    if (tape) {
      tape->entries.push_back({std::move(x), {}});
      Tape::Entry& e = tape->entries.back();
      x = apply(n, e.input, params, &e);
    } else {
      x = apply(n, x, params, nullptr);
    }
  }
  return x;
}

Tensor run_backward(const std::vector<Node>& nodes, const Tape& tape, Tensor g,
                    std::span<const Tensor> params, std::span<Tensor> grads);

Tensor backward_one(const Node& n, const Tape::Entry& e, const Tensor& g,
                    std::span<const Tensor> params, std::span<Tensor> grads) {
  switch (n.kind) {
    case Node::Kind::kConv: {
      ops::ConvGrads cg = ops::conv2d_backward(e.input, params[n.weight], g, ops::Padding::kSame);
      accumulate(grads[n.weight], cg.kernels);
      accumulate(grads[n.bias], cg.bias);
      return std::move(cg.input);
    }
    case Node::Kind::kActivation:
      return ops::activation_backward(e.input, g, n.activation);
    case Node::Kind::kPool:
      return ops::pool2d_backward(e.input, g, n.pool, n.k);
    case Node::Kind::kAvgPoolSame:
      return ops::avg_pool_same_backward(e.input, g, n.k);
    case Node::Kind::kUpsample:
      return ops::upsample2d_backward(e.input, g, n.k);
    case Node::Kind::kWindow:
      return ops::intensity_window_backward(e.input, g, n.lo, n.hi);
    case Node::Kind::kInception: {
      std::vector<Tensor> parts = ops::concat_channels_backward(g, n.branch_channels);
      Tensor total = Tensor::zeros_like(e.input);
      for (std::size_t b = 0; b < n.branches.size(); ++b) {
        accumulate(total, run_backward(n.branches[b], e.branches.at(b), std::move(parts[b]),
                                       params, grads));
      }
      return total;
    }
  }
  throw ContractViolation("network: unknown node kind");
}

Tensor run_backward(const std::vector<Node>& nodes, const Tape& tape, Tensor g,
                    std::span<const Tensor> params, std::span<Tensor> grads) {
  if (tape.entries.size() != nodes.size()) {
    throw ContractViolation("network backward: tape does not match the layer plan");
  }
  for (std::size_t i = nodes.size(); i-- > 0;) {
    g = backward_one(nodes[i], tape.entries[i], g, params, grads);
  }
  return g;
}

}  // namespace

struct Network::Plan {
  ArchitectureSpec spec;
  Digest hash{};
  std::vector<Node> nodes;
  std::vector<std::string> names;
  std::size_t minimum_extent = 1;
};

Network Network::build(const ArchitectureSpec& spec, std::uint64_t seed) {
  validate(spec);
  auto plan = std::make_shared<Plan>();
  plan->spec = spec;
  plan->hash = cwt::architecture_hash(spec);
  plan->minimum_extent = cwt::spatial_multiple(spec);

  Compiler compiler;
  std::size_t channels = spec.input_channels;
  plan->nodes = compiler.compile(spec.layers, channels, "L");

  Rng rng(seed);
  std::vector<Tensor> params;
  params.reserve(compiler.params.size());
  for (const ParamSpec& p : compiler.params) {
    plan->names.push_back(p.name);
    Tensor t(p.shape);
    if (p.fan_in > 0) {
      const double bound = std::sqrt(6.0 / static_cast<double>(p.fan_in));
      for (float& v : t.values()) v = static_cast<float>(rng.uniform(-bound, bound));
    }
    params.push_back(std::move(t));
  }
  return Network(std::move(plan), std::move(params));
}

const ArchitectureSpec& Network::architecture() const noexcept { return plan_->spec; }
const Digest& Network::architecture_hash() const noexcept { return plan_->hash; }
const std::vector<std::string>& Network::parameter_names() const noexcept {
  return plan_->names;
}

std::size_t Network::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const Tensor& p : params_) n += p.size();
  return n;
}

std::size_t Network::minimum_extent() const noexcept { return plan_->minimum_extent; }

void Network::check_input(const Tensor& image) const {
  require_chw(image, "network input");
  if (image.extent(0) != plan_->spec.input_channels) {
    throw ContractViolation("network input has " + std::to_string(image.extent(0)) +
                            " channels, architecture expects " +
                            std::to_string(plan_->spec.input_channels));
  }
  const std::size_t m = plan_->minimum_extent;
  for (std::size_t axis = 1; axis <= 2; ++axis) {
    const std::size_t e = image.extent(axis);
    if (e < m || e % m != 0) {
      throw ContractViolation("network input " + shape_string(image.shape()) +
                              " is undersized or misaligned: minimum extent is " +
                              std::to_string(m) + " and extents must be multiples of it");
    }
  }
}

Tensor Network::forward(const Tensor& image) const {
  check_input(image);
  return run(plan_->nodes, image, params_, nullptr);
}

Tensor Network::forward(const Tensor& image, Tape& tape) const {
  check_input(image);
  return run(plan_->nodes, image, params_, &tape);
}

void Network::backward(const Tape& tape, const Tensor& upstream,
                       std::span<Tensor> grads) const {
  if (grads.size() != params_.size()) {
    throw ContractViolation("network backward: expected " + std::to_string(params_.size()) +
                            " gradient slots, got " + std::to_string(grads.size()));
  }
  run_backward(plan_->nodes, tape, upstream, params_, grads);
}

std::vector<Tensor> Network::zero_gradients() const {
  std::vector<Tensor> grads;
  grads.reserve(params_.size());
  for (const Tensor& p : params_) grads.push_back(Tensor::zeros_like(p));
  return grads;
}

}  // namespace cwt
