#pragma once

#include <random>

#include "objrecon/library/features.hpp"

namespace objrecon::library {

struct RegistrationResult {
  Pose transform;         // src -> dst
  double fitness = 0;     // inlier fraction of src points, in [0,1]
  double inlier_rmse = 0; // meters over inliers
};

struct RegistrationParams {
  double inlier_distance = 0.015;  // 1.5x the downsample voxel by default
  int max_iterations = 100000;
  double confidence = 0.999;
  double edge_length_similarity = 0.9;
  int ransac_sample_size = 4;
  int icp_max_iterations = 50;
  double icp_max_correspondence = 0.02;
  double icp_relative_eps = 1e-6;
};

/// Global alignment by RANSAC over FPFH nearest-neighbor correspondences.
/// Scores candidate rigid transforms by the fraction of src points within
/// inlier_distance of dst; stops early at the configured confidence.
RegistrationResult ransac_register(const PointCloud& src, const FpfhFeatures& src_fpfh,
                                   const PointCloud& dst, const FpfhFeatures& dst_fpfh,
                                   const RegistrationParams& params, std::mt19937_64& rng);

/// Local refinement minimizing point-to-plane distances to dst (which must
/// carry normals), starting from `init`. Returns init with fitness 0 when no
/// correspondences exist.
RegistrationResult icp_point_to_plane(const PointCloud& src, const PointCloud& dst,
                                      const Pose& init, const RegistrationParams& params);

struct VerificationParams {
  double min_mask_fraction = 0.90;
  double depth_tolerance = 0.02;  // meters
};

/// Reprojection check of a registered model cloud against the live frame:
/// enough visible points must land in the instance mask and none may float
/// closer to the camera than the measured surface (within tolerance).
bool verify_registration(const Pose& object_to_world, const PointCloud& object_cloud,
                         const Frame& frame, int instance_id,
                         const VerificationParams& params = {});

/// Least-squares rigid transform mapping src[i] onto dst[i].
Pose kabsch(const std::vector<Vec3>& src, const std::vector<Vec3>& dst);

/// Rodrigues exponential of a rotation vector.
Mat3 rotation_exp(const Vec3& omega);

}  // namespace objrecon::library
