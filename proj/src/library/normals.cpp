#include <Eigen/Eigenvalues>

#include "objrecon/core/kdtree.hpp"
#include "objrecon/library/features.hpp"

namespace objrecon::library {

std::vector<Vec3> estimate_normals(const PointCloud& cloud, int k_neighbors,
                                   const std::optional<Vec3>& viewpoint) {
  if (static_cast<int>(cloud.size()) < k_neighbors)
    throw std::invalid_argument("normal estimation needs at least k points");
  KdTree3 tree(cloud.points);
  std::vector<Vec3> normals(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    std::vector<int> nn = tree.knn(cloud.points[i], k_neighbors);
    Vec3 centroid = Vec3::Zero();
    for (int j : nn) centroid += cloud.points[j];
    centroid /= static_cast<double>(nn.size());
    Mat3 cov = Mat3::Zero();
    for (int j : nn) {
      Vec3 d = cloud.points[j] - centroid;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
    Vec3 n = solver.eigenvectors().col(0);  // smallest eigenvalue
    if (viewpoint && n.dot(*viewpoint - cloud.points[i]) < 0) n = -n;
    normals[i] = n.normalized();
  }
  return normals;
}

}  // namespace objrecon::library
