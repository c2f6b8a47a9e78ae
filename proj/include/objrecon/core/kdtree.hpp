#pragma once

#include <vector>

#include "objrecon/core/types.hpp"

namespace objrecon {

/// Exact nearest-neighbor / radius queries over a fixed set of 3D points.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(const std::vector<Vec3>& points) { build(points); }

  void build(const std::vector<Vec3>& points);
  bool empty() const { return points_.empty(); }
  size_t size() const { return points_.size(); }
  const Vec3& point(size_t i) const { return points_[i]; }

  struct Result {
    int index = -1;
    double distance = std::numeric_limits<double>::infinity();
  };

  /// Closest stored point to `query`; index -1 on an empty tree.
  Result nearest(const Vec3& query) const;

  /// Indices of all stored points within `radius` of `query` (unordered).
  std::vector<int> radius_search(const Vec3& query, double radius) const;

  /// Indices of the k closest stored points, nearest first.
  std::vector<int> knn(const Vec3& query, int k) const;

 private:
  struct Node {
    int left = -1, right = -1;
    int point = -1;   // leaf payload start
    int count = 0;    // leaf payload size
    int axis = 0;
    double split = 0;
  };

  int build_recursive(int begin, int end);
  void nearest_recursive(int node, const Vec3& q, Result& best) const;
  void radius_recursive(int node, const Vec3& q, double r2, double r,
                        std::vector<int>& out) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;  // permutation into points_
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace objrecon
