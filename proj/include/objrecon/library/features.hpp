#pragma once

#include <Eigen/Dense>
#include <optional>

#include "objrecon/core/types.hpp"

namespace objrecon::library {

/// Per-point normals from the smallest eigenvector of the local covariance
/// over k nearest neighbors, oriented toward `viewpoint` when given. Throws
/// when the cloud has fewer than k points.
std::vector<Vec3> estimate_normals(const PointCloud& cloud, int k_neighbors,
                                   const std::optional<Vec3>& viewpoint = std::nullopt);

constexpr int kFpfhSize = 33;  // 3 angular features x 11 bins

struct FpfhFeatures {
  std::vector<Eigen::VectorXd> features;  // kFpfhSize each
  std::vector<uint8_t> isolated;          // 1 where no neighbor fell in the radius
};

/// Two-pass fast point feature histograms over `radius` neighborhoods.
/// Requires normals. Isolated points get a zero feature and a flag.
FpfhFeatures compute_fpfh(const PointCloud& cloud, double radius);

}  // namespace objrecon::library
