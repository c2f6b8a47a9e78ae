#include "objrecon/render/losses.hpp"

#include <cmath>

namespace objrecon::render {

namespace {
inline double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }
}

LossTerms compute_losses(const RenderSample& render, const Vec3& target_color,
                         double target_depth, double target_mask, const LossWeights& weights,
                         LossAdjoints* adj) {
  LossTerms out;
  if (adj) *adj = {};

  if (target_mask > 0) {
    Vec3 diff = target_color - render.color;
    out.color = target_mask * diff.cwiseAbs().sum();
    if (adj)
      for (int c = 0; c < 3; ++c)
        adj->d_color[c] = weights.lambda_color * target_mask * -sign(diff[c]);

    if (target_depth > 0) {
      double var = std::max(render.depth_variance, weights.variance_floor);
      double inv_std = 1.0 / std::sqrt(var);
      double residual = target_depth - render.depth;
      out.depth = target_mask * std::abs(residual) * inv_std;
      if (adj) {
        adj->d_depth = target_mask * -sign(residual) * inv_std;
        if (render.depth_variance > weights.variance_floor)
          adj->d_variance = target_mask * std::abs(residual) * -0.5 * inv_std / var;
      }
    }
  }

  double mask_residual = target_mask - render.mask;
  out.mask = std::abs(mask_residual);
  if (adj) adj->d_mask = weights.lambda_mask * -sign(mask_residual);

  out.total = out.depth + weights.lambda_color * out.color + weights.lambda_mask * out.mask;
  return out;
}

}  // namespace objrecon::render
