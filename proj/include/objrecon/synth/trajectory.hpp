#pragma once

#include <vector>

#include "objrecon/core/types.hpp"

namespace objrecon::synth {

enum class TrajectoryKind { orbit, hemisphere, linear };

/// Camera path specification. All kinds aim the camera at look_at.
///  - orbit: circle of `radius` around `center` at fixed `elevation_deg`,
///    azimuth sweeping [azimuth_start_deg, azimuth_end_deg).
///  - hemisphere: like orbit but the elevation oscillates between
///    elevation_deg and elevation_max_deg over `cycles` periods.
///  - linear: straight segment from `start` to `end`.
struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::orbit;
  Vec3 center = Vec3::Zero();
  Vec3 look_at = Vec3::Zero();
  double radius = 0.5;
  int frames = 1;
  double azimuth_start_deg = 0;
  double azimuth_end_deg = 360;
  double elevation_deg = 0;
  double elevation_max_deg = 0;
  double cycles = 1;
  Vec3 start = Vec3::Zero();  // linear only
  Vec3 end = Vec3::Zero();

  void validate() const {
    if (frames < 1) throw std::invalid_argument("trajectory needs at least one frame");
    if (kind != TrajectoryKind::linear && !(radius > 0))
      throw std::invalid_argument("orbit radius must be positive");
  }
};

/// Camera-to-world pose at `eye` looking toward `target`, +z forward, +y
/// down in world (OpenCV convention).
Pose look_at_pose(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3(0, 0, 1));

std::vector<Pose> generate_trajectory(const TrajectorySpec& spec);

}  // namespace objrecon::synth
