#pragma once

#include <random>

#include "objrecon/synth/primitives.hpp"

namespace objrecon::synth {

struct RenderOptions {
  Vec3 light_dir = Vec3(0.4, -0.5, 0.8).normalized();  // world space
  double ambient = 0.2;
  bool quantize_color = true;      // round to 8-bit steps like a real sensor
  double depth_noise_sigma = 0.0;  // meters, Gaussian on valid depths
};

/// Renders one posed RGB-D frame of an analytic scene. Depth stores the
/// camera-frame z of the nearest hit (0 where nothing is hit), masks store
/// the instance id of the nearest primitive, colors are Lambertian-shaded
/// albedo under one directional light.
Frame raycast_frame(const std::vector<Primitive>& scene, const Pose& pose,
                    const Intrinsics& intrinsics, long frame_index = 0,
                    const RenderOptions& opts = {}, std::mt19937_64* rng = nullptr);

}  // namespace objrecon::synth
