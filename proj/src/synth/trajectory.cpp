#include "objrecon/synth/trajectory.hpp"

#include <cmath>

namespace objrecon::synth {

Pose look_at_pose(const Vec3& eye, const Vec3& target, const Vec3& up) {
  Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) right = forward.cross(Vec3(0, 1, 0));
  right.normalize();
  Vec3 down = forward.cross(right).normalized();
  Pose pose;
  pose.rotation.col(0) = right;
  pose.rotation.col(1) = down;
  pose.rotation.col(2) = forward;
  pose.translation = eye;
  return pose;
}

std::vector<Pose> generate_trajectory(const TrajectorySpec& spec) {
  spec.validate();
  std::vector<Pose> poses;
  poses.reserve(spec.frames);
  const double deg = M_PI / 180.0;
  for (int i = 0; i < spec.frames; ++i) {
    double s = spec.frames > 1 ? static_cast<double>(i) / spec.frames : 0.0;
    Vec3 eye;
    switch (spec.kind) {
      case TrajectoryKind::orbit:
      case TrajectoryKind::hemisphere: {
        double az = (spec.azimuth_start_deg +
                     s * (spec.azimuth_end_deg - spec.azimuth_start_deg)) * deg;
        double elev = spec.elevation_deg * deg;
        if (spec.kind == TrajectoryKind::hemisphere) {
          double t = spec.frames > 1 ? static_cast<double>(i) / (spec.frames - 1) : 0.0;
          double mix = 0.5 - 0.5 * std::cos(2.0 * M_PI * spec.cycles * t);
          elev = (spec.elevation_deg +
                  mix * (spec.elevation_max_deg - spec.elevation_deg)) * deg;
        }
        eye = spec.center + spec.radius * Vec3(std::cos(elev) * std::cos(az),
                                               std::cos(elev) * std::sin(az), std::sin(elev));
        break;
      }
      case TrajectoryKind::linear: {
        double t = spec.frames > 1 ? static_cast<double>(i) / (spec.frames - 1) : 0.0;
        eye = spec.start + t * (spec.end - spec.start);
        break;
      }
    }
    poses.push_back(look_at_pose(eye, spec.look_at));
  }
  return poses;
}

}  // namespace objrecon::synth
