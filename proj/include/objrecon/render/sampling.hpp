#pragma once

#include <random>
#include <vector>

#include "objrecon/core/types.hpp"

namespace objrecon::render {

struct RaySampleConfig {
  int n_total = 14;        // samples per ray
  int n_surface = 13;      // of which drawn around the measured depth
  double sigma = 0.05 / 3.0;  // meters; surface band is +/- 3 sigma
  int n_synth = 24;        // samples per ray when rendering without depth

  void validate() const {
    if (n_surface < 1 || n_surface >= n_total || !(sigma > 0) || n_synth < 1)
      throw std::invalid_argument("invalid ray sample config");
  }
};

/// Depth samples for one ray with a valid measurement: n_surface normal draws
/// around the measured depth plus uniform draws between the box entry and the
/// start of the surface band. Sorted ascending, all positive. When the band
/// already reaches the box entry the uniform draws collapse into the band.
std::vector<double> sample_ray_depths(double measured_depth, double box_near,
                                      const RaySampleConfig& cfg, std::mt19937_64& rng);

/// Uniformly spaced jittered depths across [near, far] for depth-less rays.
std::vector<double> sample_uniform_depths(double near, double far, int count,
                                          std::mt19937_64& rng);

/// Deterministic midpoints of `count` equal bins of [near, far]; used when
/// rendering views from a fixed model.
std::vector<double> stratified_midpoints(double near, double far, int count);

/// Entry/exit of the z-parameterized ray origin + t * dir against a box.
/// Returns false when the ray misses. t_near is clamped positive.
bool ray_box_span(const Vec3& origin, const Vec3& dir, const BoxTransform& box, double& t_near,
                  double& t_far);

}  // namespace objrecon::render
