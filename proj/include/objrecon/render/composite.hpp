#pragma once

#include <span>
#include <vector>

#include "objrecon/core/types.hpp"

namespace objrecon::render {

/// Per-ray compositing record: inputs, termination weights and the rendered
/// color / depth / mask / depth-variance.
struct RenderSample {
  std::vector<double> depths;      // strictly ascending
  std::vector<double> occupancies;
  std::vector<Vec3> colors;
  std::vector<double> weights;     // w_i = o_i * prod_{j<i} (1 - o_j)
  Vec3 color = Vec3::Zero();
  double depth = 0;
  double mask = 0;
  double depth_variance = 0;
};

/// Front-to-back occupancy compositing.
RenderSample composite(std::span<const double> occupancies, std::span<const Vec3> colors,
                       std::span<const double> depths);

/// Adjoints of the composited outputs with respect to the per-sample
/// occupancies and colors. d_color/d_depth/d_mask/d_variance are the upstream
/// gradients on (color, depth, mask, depth_variance).
void composite_backward(const RenderSample& sample, const Vec3& d_color, double d_depth,
                        double d_mask, double d_variance, std::span<double> d_occ,
                        std::span<Vec3> d_col);

}  // namespace objrecon::render
