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

#include "cwt/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Core>

#include "cwt/error.hpp"

namespace cwt::ops {
namespace {

struct ConvGeometry {
  std::size_t in_channels, height, width;
  std::size_t out_channels, k, pad;
  std::size_t out_height, out_width;

  // Output columns [lo, hi) whose tap dx lands inside the input row.
  std::size_t x_lo(std::size_t dx) const { return dx < pad ? pad - dx : 0; }
  std::size_t x_hi(std::size_t dx) const {
    return std::min(out_width, width + pad - dx);
  }
  bool row_valid(std::size_t yo, std::size_t dy) const {
    return yo + dy >= pad && yo + dy - pad < height;
  }
};

ConvGeometry conv_geometry(const Tensor& input, const Tensor& kernels,
                           Padding padding) {
  require_chw(input, "conv2d input");
  if (kernels.rank() != 4) {
    throw ContractViolation("conv2d kernels: expected [Co,Ci,k,k], got " +
                            shape_string(kernels.shape()));
  }
  ConvGeometry g{};
  g.in_channels = input.extent(0);
  g.height = input.extent(1);
  g.width = input.extent(2);
  g.out_channels = kernels.extent(0);
  g.k = kernels.extent(2);
  if (kernels.extent(1) != g.in_channels) {
    throw ContractViolation("conv2d: input has " + std::to_string(g.in_channels) +
                            " channels but kernels expect " +
                            std::to_string(kernels.extent(1)));
  }
  if (kernels.extent(3) != g.k || g.k % 2 == 0) {
    throw ContractViolation("conv2d: kernels must be square with odd size, got " +
                            shape_string(kernels.shape()));
  }
  if (padding == Padding::kSame) {
    g.pad = (g.k - 1) / 2;
    g.out_height = g.height;
    g.out_width = g.width;
  } else {
    if (g.height < g.k || g.width < g.k) {
      throw ContractViolation("conv2d valid padding: input " +
                              shape_string(input.shape()) +
                              " smaller than kernel " + std::to_string(g.k));
    }
    g.pad = 0;
    g.out_height = g.height - g.k + 1;
    g.out_width = g.width - g.k + 1;
  }
  return g;
}

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

// Unrolls input patches into a [Ci*k*k, Ho*Wo] matrix; row (ci, dy, dx)
// holds the input value each output position sees through that tap.
void im2col(const ConvGeometry& g, const float* in, float* col) {
  const std::size_t k = g.k;
  const std::size_t plane = g.out_height * g.out_width;
  for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
    const float* in_plane = in + ci * g.height * g.width;
    for (std::size_t dy = 0; dy < k; ++dy) {
      for (std::size_t dx = 0; dx < k; ++dx) {
        float* row = col + ((ci * k + dy) * k + dx) * plane;
        const std::size_t lo = g.x_lo(dx), hi = g.x_hi(dx);
        for (std::size_t yo = 0; yo < g.out_height; ++yo) {
          float* dst = row + yo * g.out_width;
          if (!g.row_valid(yo, dy) || lo >= hi) {
            std::fill_n(dst, g.out_width, 0.0f);
            continue;
          }
          const float* src = in_plane + (yo + dy - g.pad) * g.width + dx - g.pad;
          std::fill_n(dst, lo, 0.0f);
          std::copy(src + lo, src + hi, dst + lo);
          std::fill(dst + hi, dst + g.out_width, 0.0f);
        }
      }
    }
  }
}

// Adjoint of im2col: scatters column gradients back onto the input grid.
void col2im(const ConvGeometry& g, const float* col, float* in) {
  const std::size_t k = g.k;
  const std::size_t plane = g.out_height * g.out_width;
  for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
    float* in_plane = in + ci * g.height * g.width;
    for (std::size_t dy = 0; dy < k; ++dy) {
      for (std::size_t dx = 0; dx < k; ++dx) {
        const float* row = col + ((ci * k + dy) * k + dx) * plane;
        const std::size_t lo = g.x_lo(dx), hi = g.x_hi(dx);
        if (lo >= hi) continue;
        for (std::size_t yo = 0; yo < g.out_height; ++yo) {
          if (!g.row_valid(yo, dy)) continue;
          const float* __restrict src = row + yo * g.out_width;
          float* __restrict dst = in_plane + (yo + dy - g.pad) * g.width + dx - g.pad;
          for (std::size_t x = lo; x < hi; ++x) dst[x] += src[x];
        }
      }
    }
  }
}

// 1x1 same convolutions read the input planes directly.
bool is_pointwise(const ConvGeometry& g) { return g.k == 1 && g.pad == 0; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ContractViolation(std::string(what) + ": shape " +
                            shape_string(a.shape()) + " does not match " +
                            shape_string(b.shape()));
  }
}

constexpr float kSigmoidFloor = std::numeric_limits<float>::min();
constexpr float kSigmoidCeil = 1.0f - 0x1.0p-24f;

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias,
              Padding padding) {
  const ConvGeometry g = conv_geometry(input, kernels, padding);
  if (bias.size() != g.out_channels) {
    throw ContractViolation("conv2d: bias has " + std::to_string(bias.size()) +
                            " entries for " + std::to_string(g.out_channels) +
                            " output channels");
  }
  const auto rows = static_cast<Eigen::Index>(g.in_channels * g.k * g.k);
  const auto plane = static_cast<Eigen::Index>(g.out_height * g.out_width);
  const auto co = static_cast<Eigen::Index>(g.out_channels);
  Tensor out({g.out_channels, g.out_height, g.out_width});
  MatrixMap out_m(out.data(), co, plane);
  const ConstMatrixMap w_m(kernels.data(), co, rows);
  if (is_pointwise(g)) {
    out_m.noalias() = w_m * ConstMatrixMap(input.data(), rows, plane);
  } else {
    std::vector<float> col(static_cast<std::size_t>(rows * plane));
    im2col(g, input.data(), col.data());
    out_m.noalias() = w_m * ConstMatrixMap(col.data(), rows, plane);
  }
  for (Eigen::Index c = 0; c < co; ++c) out_m.row(c).array() += bias[c];
  return out;
}

ConvGrads conv2d_backward(const Tensor& input, const Tensor& kernels,
                          const Tensor& upstream, Padding padding) {
  const ConvGeometry g = conv_geometry(input, kernels, padding);
  require_chw(upstream, "conv2d_backward upstream");
  if (upstream.extent(0) != g.out_channels || upstream.extent(1) != g.out_height ||
      upstream.extent(2) != g.out_width) {
    throw ContractViolation("conv2d_backward: upstream shape " +
                            shape_string(upstream.shape()) +
                            " does not match forward output [" +
                            std::to_string(g.out_channels) + "," +
                            std::to_string(g.out_height) + "," +
                            std::to_string(g.out_width) + "]");
  }
  ConvGrads grads{Tensor::zeros_like(input), Tensor::zeros_like(kernels),
                  Tensor({g.out_channels})};

  const auto rows = static_cast<Eigen::Index>(g.in_channels * g.k * g.k);
  const auto plane = static_cast<Eigen::Index>(g.out_height * g.out_width);
  const auto co = static_cast<Eigen::Index>(g.out_channels);
  const ConstMatrixMap up_m(upstream.data(), co, plane);
  const ConstMatrixMap w_m(kernels.data(), co, rows);
  MatrixMap gw_m(grads.kernels.data(), co, rows);

  for (Eigen::Index c = 0; c < co; ++c) {
    double sum = 0.0;
    const float* u = upstream.data() + c * plane;
    for (Eigen::Index i = 0; i < plane; ++i) sum += u[i];
    grads.bias[static_cast<std::size_t>(c)] = static_cast<float>(sum);
  }

  if (is_pointwise(g)) {
    const ConstMatrixMap in_m(input.data(), rows, plane);
    gw_m.noalias() = up_m * in_m.transpose();
    MatrixMap(grads.input.data(), rows, plane).noalias() = w_m.transpose() * up_m;
  } else {
    std::vector<float> col(static_cast<std::size_t>(rows * plane));
    im2col(g, input.data(), col.data());
    gw_m.noalias() = up_m * ConstMatrixMap(col.data(), rows, plane).transpose();
    MatrixMap col_m(col.data(), rows, plane);
    col_m.noalias() = w_m.transpose() * up_m;
    col2im(g, col.data(), grads.input.data());
  }
  return grads;
}

float sigmoid(float x) noexcept {
  float y;
  if (x >= 0.0f) {
    y = 1.0f / (1.0f + std::exp(-x));
  } else {
    const float e = std::exp(x);
    y = e / (1.0f + e);
  }
  // Keep probabilities strictly inside (0, 1) even when exp saturates.
  return std::clamp(y, kSigmoidFloor, kSigmoidCeil);
}

Tensor activation(const Tensor& x, Activation kind) {
  Tensor out = Tensor::zeros_like(x);
  const std::size_t n = x.size();
  if (kind == Activation::kRelu) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0f ? x[i] : 0.0f;
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = sigmoid(x[i]);
  }
  return out;
}

Tensor activation_backward(const Tensor& x, const Tensor& upstream,
                           Activation kind) {
  require_same_shape(x, upstream, "activation_backward");
  Tensor grad = Tensor::zeros_like(x);
  const std::size_t n = x.size();
  if (kind == Activation::kRelu) {
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = x[i] > 0.0f ? upstream[i] : 0.0f;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const float s = sigmoid(x[i]);
      grad[i] = upstream[i] * s * (1.0f - s);
    }
  }
  return grad;
}

Tensor pool2d(const Tensor& input, PoolKind kind, std::size_t k) {
  require_chw(input, "pool2d input");
  if (k == 0) throw ContractViolation("pool2d: window must be >= 1");
  const std::size_t c = input.extent(0), h = input.extent(1), w = input.extent(2);
  if (h < k || w < k) {
    throw ContractViolation("pool2d: input " + shape_string(input.shape()) +
                            " smaller than window " + std::to_string(k));
  }
  const std::size_t ho = h / k, wo = w / k;
  Tensor out({c, ho, wo});
  const float inv = 1.0f / static_cast<float>(k * k);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < ho; ++y) {
      for (std::size_t x = 0; x < wo; ++x) {
        if (kind == PoolKind::kMax) {
          float best = input(ch, y * k, x * k);
          for (std::size_t dy = 0; dy < k; ++dy) {
            for (std::size_t dx = 0; dx < k; ++dx) {
              best = std::max(best, input(ch, y * k + dy, x * k + dx));
            }
          }
          out(ch, y, x) = best;
        } else {
          float sum = 0.0f;
          for (std::size_t dy = 0; dy < k; ++dy) {
            for (std::size_t dx = 0; dx < k; ++dx) {
              sum += input(ch, y * k + dy, x * k + dx);
            }
          }
          out(ch, y, x) = sum * inv;
        }
      }
    }
  }
  return out;
}

Tensor pool2d_backward(const Tensor& input, const Tensor& upstream,
                       PoolKind kind, std::size_t k) {
  require_chw(input, "pool2d_backward input");
  require_chw(upstream, "pool2d_backward upstream");
  if (k == 0) throw ContractViolation("pool2d_backward: window must be >= 1");
  const std::size_t c = input.extent(0), h = input.extent(1), w = input.extent(2);
  if (h < k || w < k) {
    throw ContractViolation("pool2d_backward: input smaller than window");
  }
  const std::size_t ho = h / k, wo = w / k;
  if (upstream.shape() != Shape{c, ho, wo}) {
    throw ContractViolation("pool2d_backward: upstream shape " +
                            shape_string(upstream.shape()) + " does not match " +
                            shape_string({c, ho, wo}));
  }
  Tensor grad = Tensor::zeros_like(input);
  const float inv = 1.0f / static_cast<float>(k * k);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < ho; ++y) {
      for (std::size_t x = 0; x < wo; ++x) {
        const float g = upstream(ch, y, x);
        if (kind == PoolKind::kMax) {
          // First row-major maximum wins ties.
          std::size_t by = y * k, bx = x * k;
          float best = input(ch, by, bx);
          for (std::size_t dy = 0; dy < k; ++dy) {
            for (std::size_t dx = 0; dx < k; ++dx) {
              const float v = input(ch, y * k + dy, x * k + dx);
              if (v > best) {
                best = v;
                by = y * k + dy;
                bx = x * k + dx;
              }
            }
          }
          grad(ch, by, bx) += g;
        } else {
          for (std::size_t dy = 0; dy < k; ++dy) {
            for (std::size_t dx = 0; dx < k; ++dx) {
              grad(ch, y * k + dy, x * k + dx) += g * inv;
            }
          }
        }
      }
    }
  }
  return grad;
}

namespace {

// 1 / (number of in-bounds elements) for each centred window position.
std::vector<float> same_window_weights(std::size_t h, std::size_t w,
                                       std::size_t k) {
  const std::size_t r = k / 2;
  std::vector<float> weights(h * w);
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t ny = std::min(h - 1, y + r) - (y >= r ? y - r : 0) + 1;
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t nx = std::min(w - 1, x + r) - (x >= r ? x - r : 0) + 1;
      weights[y * w + x] = 1.0f / static_cast<float>(ny * nx);
    }
  }
  return weights;
}

void check_same_window(const Tensor& input, std::size_t k, const char* what) {
  require_chw(input, what);
  if (k == 0 || k % 2 == 0) {
    throw ContractViolation(std::string(what) + ": window must be odd, got " +
                            std::to_string(k));
  }
}

}  // namespace

Tensor avg_pool_same(const Tensor& input, std::size_t k) {
  check_same_window(input, k, "avg_pool_same");
  const std::size_t c = input.extent(0), h = input.extent(1), w = input.extent(2);
  const std::size_t r = k / 2;
  const std::vector<float> weights = same_window_weights(h, w, k);
  Tensor out = Tensor::zeros_like(input);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const float* src = input.data() + ch * h * w;
    float* dst = out.data() + ch * h * w;
    for (std::size_t y = 0; y < h; ++y) {
      const std::size_t y0 = y >= r ? y - r : 0, y1 = std::min(h - 1, y + r);
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t x0 = x >= r ? x - r : 0, x1 = std::min(w - 1, x + r);
        float sum = 0.0f;
        for (std::size_t yy = y0; yy <= y1; ++yy) {
          for (std::size_t xx = x0; xx <= x1; ++xx) sum += src[yy * w + xx];
        }
        dst[y * w + x] = sum * weights[y * w + x];
      }
    }
  }
  return out;
}

Tensor avg_pool_same_backward(const Tensor& input, const Tensor& upstream,
                              std::size_t k) {
  check_same_window(input, k, "avg_pool_same_backward");
  require_same_shape(input, upstream, "avg_pool_same_backward");
  const std::size_t c = input.extent(0), h = input.extent(1), w = input.extent(2);
  const std::size_t r = k / 2;
  const std::vector<float> weights = same_window_weights(h, w, k);
  Tensor grad = Tensor::zeros_like(input);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const float* up = upstream.data() + ch * h * w;
    float* dst = grad.data() + ch * h * w;
    for (std::size_t y = 0; y < h; ++y) {
      const std::size_t y0 = y >= r ? y - r : 0, y1 = std::min(h - 1, y + r);
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t x0 = x >= r ? x - r : 0, x1 = std::min(w - 1, x + r);
        const float g = up[y * w + x] * weights[y * w + x];
        for (std::size_t yy = y0; yy <= y1; ++yy) {
          for (std::size_t xx = x0; xx <= x1; ++xx) dst[yy * w + xx] += g;
        }
      }
    }
  }
  return grad;
}

Tensor upsample2d(const Tensor& input, std::size_t k) {
  require_chw(input, "upsample2d input");
  if (k == 0) throw ContractViolation("upsample2d: factor must be >= 1");
  const std::size_t c = input.extent(0), h = input.extent(1), w = input.extent(2);
  Tensor out({c, h * k, w * k});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h * k; ++y) {
      for (std::size_t x = 0; x < w * k; ++x) out(ch, y, x) = input(ch, y / k, x / k);
    }
  }
  return out;
}

Tensor upsample2d_backward(const Tensor& input, const Tensor& upstream,
                           std::size_t k) {
  require_chw(input, "upsample2d_backward input");
  if (k == 0) throw ContractViolation("upsample2d_backward: factor must be >= 1");
  const std::size_t c = input.extent(0), h = input.extent(1), w = input.extent(2);
  if (upstream.shape() != Shape{c, h * k, w * k}) {
    throw ContractViolation("upsample2d_backward: upstream shape " +
                            shape_string(upstream.shape()) + " does not match " +
                            shape_string({c, h * k, w * k}));
  }
  Tensor grad = Tensor::zeros_like(input);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h * k; ++y) {
      for (std::size_t x = 0; x < w * k; ++x) {
        grad(ch, y / k, x / k) += upstream(ch, y, x);
      }
    }
  }
  return grad;
}

Tensor intensity_window(const Tensor& input, float lo, float hi) {
  if (!(hi > lo)) throw ContractViolation("intensity_window: requires lo < hi");
  Tensor out = Tensor::zeros_like(input);
  const float scale = 1.0f / (hi - lo);
  for (std::size_t i = 0; i < input.size(); ++i) {
    out[i] = (std::clamp(input[i], lo, hi) - lo) * scale;
  }
  return out;
}

Tensor intensity_window_backward(const Tensor& input, const Tensor& upstream,
                                 float lo, float hi) {
  if (!(hi > lo)) throw ContractViolation("intensity_window: requires lo < hi");
  require_same_shape(input, upstream, "intensity_window_backward");
  Tensor grad = Tensor::zeros_like(input);
  const float scale = 1.0f / (hi - lo);
  for (std::size_t i = 0; i < input.size(); ++i) {
    grad[i] = (input[i] > lo && input[i] < hi) ? upstream[i] * scale : 0.0f;
  }
  return grad;
}

Tensor concat_channels(std::span<const Tensor> inputs) {
  if (inputs.empty()) throw ContractViolation("concat_channels: no inputs");
  std::size_t channels = 0;
  for (const Tensor& t : inputs) {
    require_chw(t, "concat_channels input");
    if (t.extent(1) != inputs[0].extent(1) || t.extent(2) != inputs[0].extent(2)) {
      throw ContractViolation("concat_channels: spatial mismatch " +
                              shape_string(t.shape()) + " vs " +
                              shape_string(inputs[0].shape()));
    }
    channels += t.extent(0);
  }
  Tensor out({channels, inputs[0].extent(1), inputs[0].extent(2)});
  float* dst = out.data();
  for (const Tensor& t : inputs) dst = std::copy(t.data(), t.data() + t.size(), dst);
  return out;
}

std::vector<Tensor> concat_channels_backward(
    const Tensor& upstream, std::span<const std::size_t> channel_counts) {
  require_chw(upstream, "concat_channels_backward upstream");
  std::size_t total = 0;
  for (const std::size_t c : channel_counts) total += c;
  if (total != upstream.extent(0)) {
    throw ContractViolation("concat_channels_backward: channel counts sum to " +
                            std::to_string(total) + " but upstream has " +
                            std::to_string(upstream.extent(0)));
  }
  const std::size_t plane = upstream.extent(1) * upstream.extent(2);
  std::vector<Tensor> grads;
  grads.reserve(channel_counts.size());
  const float* src = upstream.data();
  for (const std::size_t c : channel_counts) {
    Tensor g({c, upstream.extent(1), upstream.extent(2)});
    std::copy(src, src + c * plane, g.data());
    src += c * plane;
    grads.push_back(std::move(g));
  }
  return grads;
}

}  // namespace cwt::ops
