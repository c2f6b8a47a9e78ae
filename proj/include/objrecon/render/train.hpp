#pragma once

#include <random>
#include <span>

#include "objrecon/field/model.hpp"
#include "objrecon/render/adamw.hpp"
#include "objrecon/render/losses.hpp"
#include "objrecon/render/sampling.hpp"

namespace objrecon::render {

/// One supervised ray. dir uses the z-depth parameterization: the point at
/// depth d is origin + d * dir, where dir = R * K^-1 * (u, v, 1).
struct RayTarget {
  Vec3 origin = Vec3::Zero();
  Vec3 dir = Vec3::UnitZ();
  Vec3 color = Vec3::Zero();
  double depth = 0;  // target z-depth; <= 0 marks no depth supervision
  double mask = 0;   // target mask value in [0, 1]
};

struct TrainStats {
  int rays = 0;      // batch size
  int rays_hit = 0;  // rays intersecting the model box
  double loss_color = 0;
  double loss_depth = 0;
  double loss_mask = 0;
  double loss_total = 0;  // per-ray average of the weighted sum
};

/// Scratch shared across train steps of one object.
struct TrainWorkspace {
  field::GradientBuffer grads;
  field::FieldEvaluator eval;
  std::vector<Vec3> coords;
  std::vector<double> d_occ;
  std::vector<Vec3> d_col;
};

/// One optimization step: samples depths per ray, renders through the model,
/// accumulates gradients of the averaged loss and applies AdamW. Rays missing
/// the box contribute nothing. An empty batch is a no-op.
TrainStats train_step(field::ObjectModel& model, std::span<const RayTarget> rays,
                      const RaySampleConfig& scfg, const LossWeights& weights,
                      const AdamWConfig& ocfg, TrainWorkspace& ws, std::mt19937_64& rng);

/// Loss of a batch against a fixed model (no sampling, caller supplies the
/// depths per ray). Shared by train_step and the gradient-check oracles.
struct RayRender {
  RenderSample sample;
  LossTerms losses;
};

}  // namespace objrecon::render
