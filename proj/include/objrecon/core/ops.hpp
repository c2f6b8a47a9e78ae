#pragma once

#include "objrecon/core/types.hpp"

namespace objrecon {

struct PixelProjection {
  double u = 0, v = 0;  // image-plane coordinates
  double depth = 0;     // camera-frame z
  bool in_front = false;
};

/// World point -> pixel coordinates and z-depth under a camera pose.
PixelProjection project_point(const Vec3& p_world, const Pose& pose, const Intrinsics& intr);

/// Pixel (u,v) with z-depth d -> world point.
Vec3 backproject_pixel(double u, double v, double depth, const Pose& pose, const Intrinsics& intr);

/// World-space cloud of all masked pixels of `instance_id` with valid depth.
/// Throws if the instance never occurs in the frame's masks.
PointCloud backproject(const Frame& frame, int instance_id);

/// Axis-aligned bounding box of a cloud, extents inflated by margin_fraction
/// and clamped to min_extent per axis. Throws on an empty cloud.
BoxTransform update_bounding_box(const PointCloud& cloud, double margin_fraction,
                                 double min_extent = 0.02);

/// Same, but the box keeps a fixed orientation: the AABB is taken in the
/// rotated frame.
BoxTransform update_bounding_box_oriented(const PointCloud& cloud, const Mat3& rotation,
                                          double margin_fraction, double min_extent = 0.02);

/// One centroid per occupied voxel. Averages normals/colors when present.
/// Output is ordered by voxel key, so results are deterministic.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

}  // namespace objrecon
