#pragma once

#include <array>
#include <vector>

#include "objrecon/core/types.hpp"

namespace objrecon::mesh {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> colors;  // per vertex, optional

  bool empty() const { return vertices.empty(); }
  bool has_colors() const { return colors.size() == vertices.size() && !vertices.empty(); }

  double surface_area() const;

  /// Count of edges not shared by exactly two triangles; 0 for a closed mesh.
  size_t boundary_edge_count() const;

  void transform(const Mat3& rotation, const Vec3& translation);
  void append(const TriangleMesh& other);
};

}  // namespace objrecon::mesh
