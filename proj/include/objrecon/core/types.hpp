#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "objrecon/core/image.hpp"

namespace objrecon {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole camera model. depth_scale converts stored depth-image units to
/// meters: meters = value / depth_scale.
struct Intrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  double depth_scale = 1000.0;

  void validate() const {
    if (!(fx > 0) || !(fy > 0)) throw std::invalid_argument("focal lengths must be positive");
    if (!(cx > 0 && cx < width)) throw std::invalid_argument("cx outside image");
    if (!(cy > 0 && cy < height)) throw std::invalid_argument("cy outside image");
    if (!(depth_scale > 0)) throw std::invalid_argument("depth_scale must be positive");
  }
};

/// Camera-to-world rigid transform.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p_cam) const { return rotation * p_cam + translation; }
  Vec3 apply_inverse(const Vec3& p_world) const {
    return rotation.transpose() * (p_world - translation);
  }
  Pose inverse() const { return {rotation.transpose(), -(rotation.transpose() * translation)}; }
  Pose compose(const Pose& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  bool is_valid_rotation(double tol = 1e-6) const {
    Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
    return err.cwiseAbs().maxCoeff() < tol && std::abs(rotation.determinant() - 1.0) < tol;
  }
  void validate() const {
    if (!is_valid_rotation()) throw std::invalid_argument("pose rotation not orthonormal");
  }
};

/// One RGB-D observation. Depth 0 marks an invalid measurement; mask id 0 is
/// background.
struct Frame {
  long index = 0;
  ImageF color;    // H x W x 3, values in [0,1]
  ImageF depth;    // H x W, meters
  ImageU16 masks;  // H x W instance ids
  std::map<int, int> categories;  // instance id -> semantic category id
  Pose pose;
  Intrinsics intrinsics;

  std::optional<int> category_of(int instance_id) const {
    auto it = categories.find(instance_id);
    if (it == categories.end()) return std::nullopt;
    return it->second;
  }
};

/// Maps the canonical unit cube [0,1]^3 (center 0.5) to a world-space box
/// with per-axis extent, orientation and center.
struct BoxTransform {
  Vec3 extent = Vec3::Ones();
  Mat3 rotation = Mat3::Identity();
  Vec3 center = Vec3::Zero();

  /// World point -> canonical box coordinates.
  Vec3 to_box(const Vec3& p) const {
    Vec3 local = rotation.transpose() * (p - center);
    return local.cwiseQuotient(extent) + Vec3::Constant(0.5);
  }
  /// Canonical box coordinates -> world point.
  Vec3 from_box(const Vec3& q) const {
    return rotation * ((q - Vec3::Constant(0.5)).cwiseProduct(extent)) + center;
  }
  bool contains(const Vec3& p) const {
    Vec3 q = to_box(p);
    return q.minCoeff() >= 0.0 && q.maxCoeff() <= 1.0;
  }
  void validate() const {
    if (!(extent.minCoeff() > 0)) throw std::invalid_argument("box extent must be positive");
  }
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // unit length when present
  std::vector<Vec3> colors;   // [0,1] when present

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return normals.size() == points.size() && !points.empty(); }
  bool has_colors() const { return colors.size() == points.size() && !points.empty(); }

  void append(const PointCloud& other) {
    points.insert(points.end(), other.points.begin(), other.points.end());
    if (!normals.empty() || !other.normals.empty())
      normals.insert(normals.end(), other.normals.begin(), other.normals.end());
    if (!colors.empty() || !other.colors.empty())
      colors.insert(colors.end(), other.colors.begin(), other.colors.end());
  }
};

}  // namespace objrecon
