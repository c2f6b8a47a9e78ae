#pragma once

#include <span>
#include <vector>

#include "objrecon/field/model.hpp"

namespace objrecon::render {

struct AdamWConfig {
  double lr_grid = 5e-3;
  double lr_mlp = 3.5e-4;
  double weight_decay = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One decoupled-weight-decay Adam step on a single tensor.
void adamw_update(std::span<double> params, std::span<const double> grads,
                  std::span<double> m, std::span<double> v, long& step, double lr,
                  const AdamWConfig& cfg);

/// Applies adamw_update to every trainable tensor of a model, using the grid
/// or MLP learning rate per tensor. Frozen components are untouched.
void adamw_step(field::ObjectModel& model, const field::GradientBuffer& grads,
                const AdamWConfig& cfg);

}  // namespace objrecon::render
