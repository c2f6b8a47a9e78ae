#pragma once

#include "objrecon/field/model.hpp"
#include "objrecon/render/composite.hpp"

namespace objrecon::render {

/// Full-frame render of a model from one pose. The mask image holds the
/// composited termination mass in [0,1]; depth holds the mask-normalized
/// expected depth where at least half the ray mass terminates, else 0.
struct RenderedView {
  Pose pose;
  Intrinsics intrinsics;
  ImageF color;  // H x W x 3
  ImageF depth;  // H x W
  ImageF mask;   // H x W, float in [0,1]
};

/// Composites one z-parameterized ray through the model with `n_samples`
/// deterministic midpoints across the ray/box overlap. Returns an empty
/// RenderSample (mask 0) when the ray misses the box.
RenderSample render_ray(const field::ObjectModel& model, const Vec3& origin, const Vec3& dir,
                        int n_samples, field::FieldEvaluator& eval);

RenderedView render_view(const field::ObjectModel& model, const Pose& pose,
                         const Intrinsics& intrinsics, int n_samples);

}  // namespace objrecon::render
