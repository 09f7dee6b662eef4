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

#include "cwt/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "cwt/error.hpp"
#include "cwt/rng.hpp"

namespace cwt {
namespace {

using Vec3 = std::array<double, 3>;

// Sum of random plane waves with unit variance; positions in mm.
class SmoothField {
 public:
  SmoothField(Rng& rng, std::size_t waves, double min_wavelength, double max_wavelength) {
    for (std::size_t i = 0; i < waves; ++i) {
      Wave w;
      const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double cz = rng.uniform(-1.0, 1.0);
      const double sz = std::sqrt(1.0 - cz * cz);
      const double k = 2.0 * std::numbers::pi / rng.uniform(min_wavelength, max_wavelength);
      w.k = {k * sz * std::cos(theta), k * sz * std::sin(theta), k * cz};
      w.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      waves_.push_back(w);
    }
    amplitude_ = std::sqrt(2.0 / static_cast<double>(waves));
  }

  double operator()(const Vec3& p) const {
    double s = 0.0;
    for (const Wave& w : waves_) s += std::cos(w.k[0] * p[0] + w.k[1] * p[1] + w.k[2] * p[2] + w.phase);
    return amplitude_ * s;
  }

 private:
  struct Wave {
    Vec3 k;
    double phase;
  };
  std::vector<Wave> waves_;
  double amplitude_ = 1.0;
};

struct Ellipsoid {
  Vec3 center;  // mm
  Vec3 radii;   // mm
};

bool inside(const Ellipsoid& e, const Vec3& p, double scale, const Vec3& pivot) {
  double q = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double c = pivot[i] + scale * (e.center[i] - pivot[i]);
    const double d = (p[i] - c) / (scale * e.radii[i]);
    q += d * d;
  }
  return q <= 1.0;
}

struct Lesion {
  Vec3 pivot;
  std::vector<Ellipsoid> parts;
  double hu_base = 0.0;
};

class Geometry {
 public:
  Geometry(const Dims3& d, const Spacing3& s) : dims_(d), spacing_(s) {}

  Vec3 position(std::size_t x, std::size_t y, std::size_t z) const {
    return {(static_cast<double>(x) + 0.5) * spacing_[0], (static_cast<double>(y) + 0.5) * spacing_[1],
            (static_cast<double>(z) + 0.5) * spacing_[2]};
  }
  double voxel_mm3() const {
    return static_cast<double>(spacing_[0]) * spacing_[1] * spacing_[2];
  }
  // Voxel index range along an axis covering [lo, hi] mm.
  std::pair<std::size_t, std::size_t> range(std::size_t axis, double lo, double hi) const {
    const double s = spacing_[axis];
    const double a = std::max(0.0, std::floor(lo / s - 0.5));
    const double b = std::min(static_cast<double>(dims_[axis]), std::ceil(hi / s + 0.5));
    return {static_cast<std::size_t>(a), static_cast<std::size_t>(std::max(a, b))};
  }
  const Dims3& dims() const { return dims_; }

 private:
  Dims3 dims_;
  Spacing3 spacing_;
};

// Marks voxels covered by any lesion part at the given scale, restricted to
// the brain. Returns the marked count.
std::size_t rasterize(const Geometry& g, const std::vector<Lesion>& lesions, double scale,
                      const std::vector<std::uint8_t>& brain, std::vector<std::int16_t>& owner) {
  std::fill(owner.begin(), owner.end(), std::int16_t{-1});
  std::size_t count = 0;
  const Dims3& d = g.dims();
  for (std::size_t j = 0; j < lesions.size(); ++j) {
    const Lesion& l = lesions[j];
    for (const Ellipsoid& e : l.parts) {
      std::array<std::pair<std::size_t, std::size_t>, 3> r;
      for (std::size_t a = 0; a < 3; ++a) {
        const double c = l.pivot[a] + scale * (e.center[a] - l.pivot[a]);
        r[a] = g.range(a, c - scale * e.radii[a], c + scale * e.radii[a]);
      }
      for (std::size_t z = r[2].first; z < r[2].second; ++z) {
        for (std::size_t y = r[1].first; y < r[1].second; ++y) {
          for (std::size_t x = r[0].first; x < r[0].second; ++x) {
            const std::size_t i = (z * d[1] + y) * d[0] + x;
            if (!brain[i] || owner[i] >= 0) continue;
            if (inside(e, g.position(x, y, z), scale, l.pivot)) {
              owner[i] = static_cast<std::int16_t>(j);
              ++count;
            }
          }
        }
      }
    }
  }
  return count;
}

}  // namespace

void validate(const SitePhantomParams& p) {
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError("phantom params '" + p.site_id + "': " + name + " must be positive");
    }
  };
  for (std::size_t i = 0; i < 3; ++i) {
    if (p.dims[i] < 4) throw ValidationError("phantom params '" + p.site_id + "': dims must be at least 4");
    positive(p.spacing_mm[i], "spacing_mm");
  }
  positive(p.lesion_median_mm3, "lesion_median_mm3");
  positive(p.lesion_log_sd, "lesion_log_sd");
  positive(p.tissue_hu_sd, "tissue_hu_sd");
  positive(p.noise_sd, "noise_sd");
  if (p.volume_count == 0) throw ValidationError("phantom params '" + p.site_id + "': volume_count is zero");
  if (p.lesion_count_min > p.lesion_count_max || p.lesion_count_max > 16) {
    throw ValidationError("phantom params '" + p.site_id + "': lesion count range must satisfy min <= max <= 16");
  }
  // Acute blood sits between brain parenchyma and bone.
  if (!(p.lesion_hu_min < p.lesion_hu_max) || p.lesion_hu_min < 30.0 || p.lesion_hu_max > 150.0) {
    throw ValidationError("phantom params '" + p.site_id + "': lesion HU range must lie within [30, 150]");
  }
  if (!(p.tissue_hu_mean < p.lesion_hu_min)) {
    throw ValidationError("phantom params '" + p.site_id + "': tissue must be less dense than lesions");
  }
}

Phantom generate_phantom(const SitePhantomParams& params, std::size_t volume_index, bool keep_noiseless) {
  validate(params);
  Rng rng(derive_seed(params.seed, "phantom", volume_index));
  const Geometry g(params.dims, params.spacing_mm);
  const Dims3& d = params.dims;
  const std::size_t n = d[0] * d[1] * d[2];

  Phantom out{VolumeImage(d, params.spacing_mm, kBackgroundHu), SegmentationMask(d, params.spacing_mm), 0.0, {}};

  Vec3 extent{};
  for (std::size_t a = 0; a < 3; ++a) extent[a] = static_cast<double>(d[a]) * params.spacing_mm[a];
  Ellipsoid brain_shape;
  constexpr Vec3 kBrainFraction{0.40, 0.44, 0.42};
  for (std::size_t a = 0; a < 3; ++a) {
    brain_shape.center[a] = extent[a] * (0.5 + rng.uniform(-0.02, 0.02));
    brain_shape.radii[a] = extent[a] * kBrainFraction[a] * rng.uniform(0.92, 1.0);
  }
  const SmoothField tissue(rng, 6, 15.0, 60.0);

  std::vector<std::uint8_t> brain(n, 0);
  std::size_t brain_voxels = 0;
  for (std::size_t z = 0; z < d[2]; ++z) {
    for (std::size_t y = 0; y < d[1]; ++y) {
      for (std::size_t x = 0; x < d[0]; ++x) {
        const Vec3 p = g.position(x, y, z);
        if (!inside(brain_shape, p, 1.0, brain_shape.center)) continue;
        const std::size_t i = out.image.index(x, y, z);
        brain[i] = 1;
        ++brain_voxels;
        out.image.voxels[i] = static_cast<float>(params.tissue_hu_mean + params.tissue_hu_sd * tissue(p));
      }
    }
  }
  if (brain_voxels == 0) throw GenerationError("phantom '" + params.site_id + "': empty brain region");

  const std::size_t lesion_count =
      params.lesion_count_min +
      static_cast<std::size_t>(rng.below(params.lesion_count_max - params.lesion_count_min + 1));
  if (lesion_count > 0) {
    const double target =
        std::exp(std::log(params.lesion_median_mm3) + params.lesion_log_sd * rng.normal());
    out.target_lesion_mm3 = target;
    const double capacity = static_cast<double>(brain_voxels) * g.voxel_mm3();
    if (target > 0.5 * capacity) {
      throw GenerationError("phantom '" + params.site_id + "' volume " + std::to_string(volume_index) +
                            ": lesion target " + std::to_string(target) +
                            " mm3 exceeds half the brain capacity of " + std::to_string(capacity) + " mm3");
    }

    std::vector<double> weights(lesion_count);
    for (double& w : weights) w = rng.uniform(0.5, 1.5);
    double weight_sum = 0.0;
    for (const double w : weights) weight_sum += w;

    std::vector<Lesion> lesions(lesion_count);
    for (std::size_t j = 0; j < lesion_count; ++j) {
      Lesion& l = lesions[j];
      Vec3 u{};
      double r2 = 2.0;
      while (r2 > 1.0) {
        r2 = 0.0;
        for (double& c : u) {
          c = rng.uniform(-1.0, 1.0);
          r2 += c * c;
        }
      }
      for (std::size_t a = 0; a < 3; ++a) {
        l.pivot[a] = brain_shape.center[a] + 0.55 * u[a] * brain_shape.radii[a];
      }
      const double r = std::cbrt(3.0 * target * weights[j] / weight_sum / (4.0 * std::numbers::pi));
      const std::size_t parts = 2 + static_cast<std::size_t>(rng.below(3));
      for (std::size_t k = 0; k < parts; ++k) {
        Ellipsoid e;
        // Each part contains the pivot, so scaled unions are nested.
        Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
        const double norm = std::max(1e-12, std::hypot(dir[0], dir[1], dir[2]));
        const double offset = k == 0 ? 0.0 : 0.5 * r;
        for (std::size_t a = 0; a < 3; ++a) {
          e.center[a] = l.pivot[a] + offset * dir[a] / norm;
          e.radii[a] = r * rng.uniform(0.6, 1.2);
        }
        l.parts.push_back(e);
      }
      l.hu_base = params.lesion_hu_min + (params.lesion_hu_max - params.lesion_hu_min) * rng.uniform(0.25, 0.75);
    }

    // Bisect a common scale until the rasterized union hits the target.
    std::vector<std::int16_t> owner(n, -1);
    const double target_voxels = target / g.voxel_mm3();
    double lo = 0.05, hi = 4.0;
    if (static_cast<double>(rasterize(g, lesions, hi, brain, owner)) < target_voxels) {
      throw GenerationError("phantom '" + params.site_id + "' volume " + std::to_string(volume_index) +
                            ": lesions cannot reach the target volume inside the brain");
    }
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto c = static_cast<double>(rasterize(g, lesions, mid, brain, owner));
      (c < target_voxels ? lo : hi) = mid;
    }
    rasterize(g, lesions, hi, brain, owner);

    const SmoothField texture(rng, 4, 4.0, 12.0);
    const double span = params.lesion_hu_max - params.lesion_hu_min;
    for (std::size_t z = 0; z < d[2]; ++z) {
      for (std::size_t y = 0; y < d[1]; ++y) {
        for (std::size_t x = 0; x < d[0]; ++x) {
          const std::size_t i = out.image.index(x, y, z);
          if (owner[i] < 0) continue;
          const double hu = lesions[static_cast<std::size_t>(owner[i])].hu_base + 0.12 * span * texture(g.position(x, y, z));
          out.image.voxels[i] = static_cast<float>(std::clamp(hu, params.lesion_hu_min, params.lesion_hu_max));
          out.mask.voxels[i] = 1;
        }
      }
    }
  }

  if (keep_noiseless) out.noiseless = out.image.voxels;
  for (float& v : out.image.voxels) v = static_cast<float>(v + params.noise_sd * rng.normal());
  return out;
}

}  // namespace cwt
