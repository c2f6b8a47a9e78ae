#pragma once

#include "objrecon/render/composite.hpp"

namespace objrecon::render {

struct LossWeights {
  double lambda_color = 5.0;
  double lambda_mask = 10.0;
  double variance_floor = 1e-6;  // m^2, guards the depth-loss denominator

  void validate() const {
    if (lambda_color < 0 || lambda_mask < 0 || variance_floor < 0)
      throw std::invalid_argument("loss weights must be non-negative");
  }
};

struct LossTerms {
  double color = 0;
  double depth = 0;
  double mask = 0;
  double total = 0;
};

/// Adjoints of the total per-ray loss w.r.t. the rendered outputs.
struct LossAdjoints {
  Vec3 d_color = Vec3::Zero();
  double d_depth = 0;
  double d_mask = 0;
  double d_variance = 0;
};

/// Per-ray loss terms against targets. An invalid target depth (<= 0) or a
/// zero mask skips the depth term; the color term carries the mask factor.
/// total = depth + lambda_color * color + lambda_mask * mask.
LossTerms compute_losses(const RenderSample& render, const Vec3& target_color,
                         double target_depth, double target_mask, const LossWeights& weights,
                         LossAdjoints* adjoints = nullptr);

}  // namespace objrecon::render
