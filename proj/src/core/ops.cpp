#include "objrecon/core/ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace objrecon {

PixelProjection project_point(const Vec3& p_world, const Pose& pose, const Intrinsics& intr) {
  Vec3 p_cam = pose.apply_inverse(p_world);
  PixelProjection out;
  out.depth = p_cam.z();
  out.in_front = p_cam.z() > 0;
  if (out.in_front) {
    out.u = intr.fx * p_cam.x() / p_cam.z() + intr.cx;
    out.v = intr.fy * p_cam.y() / p_cam.z() + intr.cy;
  }
  return out;
}

Vec3 backproject_pixel(double u, double v, double depth, const Pose& pose, const Intrinsics& intr) {
  Vec3 p_cam((u - intr.cx) * depth / intr.fx, (v - intr.cy) * depth / intr.fy, depth);
  return pose.apply(p_cam);
}

PointCloud backproject(const Frame& frame, int instance_id) {
  bool seen = false;
  PointCloud cloud;
  for (int y = 0; y < frame.masks.height; ++y) {
    for (int x = 0; x < frame.masks.width; ++x) {
      if (frame.masks.at(x, y) != instance_id) continue;
      seen = true;
      float d = frame.depth.at(x, y);
      if (d <= 0) continue;
      cloud.points.push_back(backproject_pixel(x, y, d, frame.pose, frame.intrinsics));
      if (!frame.color.empty())
        cloud.colors.push_back(
            Vec3(frame.color.at(x, y, 0), frame.color.at(x, y, 1), frame.color.at(x, y, 2)));
    }
  }
  if (!seen) throw std::invalid_argument("instance id absent from frame masks");
  return cloud;
}

BoxTransform update_bounding_box_oriented(const PointCloud& cloud, const Mat3& rotation,
                                          double margin_fraction, double min_extent) {
  if (cloud.empty()) throw std::invalid_argument("cannot bound an empty cloud");
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const Vec3& p : cloud.points) {
    Vec3 local = rotation.transpose() * p;
    lo = lo.cwiseMin(local);
    hi = hi.cwiseMax(local);
  }
  BoxTransform box;
  box.rotation = rotation;
  box.center = rotation * ((lo + hi) * 0.5);
  box.extent = ((hi - lo) * (1.0 + margin_fraction)).cwiseMax(min_extent);
  return box;
}

BoxTransform update_bounding_box(const PointCloud& cloud, double margin_fraction,
                                 double min_extent) {
  return update_bounding_box_oriented(cloud, Mat3::Identity(), margin_fraction, min_extent);
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0)) throw std::invalid_argument("voxel size must be positive");
  struct Accum {
    Vec3 p = Vec3::Zero(), n = Vec3::Zero(), c = Vec3::Zero();
    int count = 0;
  };
  // std::map keeps voxel keys ordered so the output is deterministic.
  std::map<std::tuple<long, long, long>, Accum> buckets;
  bool with_normals = cloud.has_normals();
  bool with_colors = cloud.has_colors();
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    auto key = std::make_tuple(static_cast<long>(std::floor(p.x() / voxel)),
                               static_cast<long>(std::floor(p.y() / voxel)),
                               static_cast<long>(std::floor(p.z() / voxel)));
    Accum& a = buckets[key];
    a.p += p;
    if (with_normals) a.n += cloud.normals[i];
    if (with_colors) a.c += cloud.colors[i];
    a.count++;
  }
  PointCloud out;
  out.points.reserve(buckets.size());
  for (const auto& [key, a] : buckets) {
    (void)key;
    out.points.push_back(a.p / a.count);
    if (with_normals) {
      Vec3 n = a.n / a.count;
      double len = n.norm();
      out.normals.push_back(len > 1e-12 ? Vec3(n / len) : Vec3(0, 0, 1));
    }
    if (with_colors) out.colors.push_back(a.c / a.count);
  }
  return out;
}

}  // namespace objrecon
