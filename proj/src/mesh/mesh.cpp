#include "objrecon/mesh/mesh.hpp"

#include <cstdint>
#include <unordered_map>

namespace objrecon::mesh {

double TriangleMesh::surface_area() const {
  double area = 0;
  for (const auto& t : triangles) {
    const Vec3& a = vertices[t[0]];
    area += 0.5 * (vertices[t[1]] - a).cross(vertices[t[2]] - a).norm();
  }
  return area;
}

size_t TriangleMesh::boundary_edge_count() const {
  std::unordered_map<uint64_t, int> edge_faces;
  auto key = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
  };
  for (const auto& t : triangles) {
    edge_faces[key(t[0], t[1])]++;
    edge_faces[key(t[1], t[2])]++;
    edge_faces[key(t[2], t[0])]++;
  }
  size_t boundary = 0;
  for (const auto& [k, count] : edge_faces) {
    (void)k;
    if (count != 2) boundary++;
  }
  return boundary;
}

void TriangleMesh::transform(const Mat3& rotation, const Vec3& translation) {
  for (Vec3& v : vertices) v = rotation * v + translation;
}

void TriangleMesh::append(const TriangleMesh& other) {
  int offset = static_cast<int>(vertices.size());
  vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
  for (const auto& t : other.triangles)
    triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
  if (!colors.empty() || !other.colors.empty())
    colors.insert(colors.end(), other.colors.begin(), other.colors.end());
}

}  // namespace objrecon::mesh
