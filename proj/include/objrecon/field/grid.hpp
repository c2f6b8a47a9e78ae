#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "objrecon/core/types.hpp"

namespace objrecon::field {

struct GridConfig {
  int levels = 3;
  int n0 = 16;       // vertices per side at the coarsest level
  double gamma = 1.5;

  int level_side(int level) const {
    return static_cast<int>(std::lround(n0 * std::pow(gamma, level)));
  }
  void validate() const {
    if (levels < 1 || n0 < 2 || !(gamma > 1))
      throw std::invalid_argument("invalid grid config");
  }
  bool operator==(const GridConfig&) const = default;
};

/// Interpolation footprint of one query at one level: the 8 cell-corner
/// vertex indices and their trilinear weights.
struct CellFootprint {
  int corner[8];
  double weight[8];
};

/// Dense multi-resolution vertex grid over the unit cube, one scalar per
/// vertex per level. The trainable encoder half of an object model.
struct FeatureGrid {
  GridConfig config;
  std::vector<std::vector<double>> levels;

  static FeatureGrid create(const GridConfig& cfg, std::mt19937_64& rng, double init_scale = 1e-4);

  size_t parameter_count() const {
    size_t n = 0;
    for (const auto& l : levels) n += l.size();
    return n;
  }

  /// Trilinear weights and corner indices for a clamped query at one level.
  CellFootprint footprint(int level, const Vec3& x) const;

  /// Interpolated scalar at one level.
  double interpolate_level(int level, const Vec3& x) const;

  /// Concatenated per-level interpolations; out must hold config.levels values.
  void encode(const Vec3& x, double* out) const;

  /// Draws one feature from the init distribution (uniform, float32-valued).
  static double random_feature(std::mt19937_64& rng, double init_scale = 1e-4);
};

/// Fills a grid for a box that changed from `old_box` to `new_box` in the
/// same world frame: each new vertex is mapped through the box change and
/// takes the interpolated old feature when it lands inside the old box,
/// otherwise a fresh random value.
FeatureGrid reinterpolate_grid(const FeatureGrid& old_grid, const BoxTransform& new_to_old,
                               std::mt19937_64& rng, double init_scale = 1e-4);

/// Canonical mapping between two boxes: unit-cube coords of `new_box` to
/// unit-cube coords of `old_box`.
BoxTransform box_change(const BoxTransform& old_box, const BoxTransform& new_box);

}  // namespace objrecon::field
