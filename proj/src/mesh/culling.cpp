#include "objrecon/mesh/culling.hpp"

#include <cmath>

#include "objrecon/core/ops.hpp"

namespace objrecon::mesh {

TriangleMesh cull_unseen(const TriangleMesh& mesh, const std::vector<Frame>& frames, double tau) {
  if (tau < 0) throw std::invalid_argument("culling tolerance must be non-negative");
  std::vector<char> seen(mesh.vertices.size(), 0);
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    for (const Frame& frame : frames) {
      PixelProjection p = project_point(mesh.vertices[i], frame.pose, frame.intrinsics);
      if (!p.in_front) continue;
      int u = static_cast<int>(std::lround(p.u));
      int v = static_cast<int>(std::lround(p.v));
      if (!frame.depth.contains(u, v)) continue;
      float measured = frame.depth.at(u, v);
      if (measured <= 0) continue;
      if (p.depth <= measured + tau) {
        seen[i] = 1;
        break;
      }
    }
  }

  TriangleMesh out;
  std::vector<int> remap(mesh.vertices.size(), -1);
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (!seen[i]) continue;
    remap[i] = static_cast<int>(out.vertices.size());
    out.vertices.push_back(mesh.vertices[i]);
    if (mesh.has_colors()) out.colors.push_back(mesh.colors[i]);
  }
  for (const auto& t : mesh.triangles) {
    if (remap[t[0]] < 0 || remap[t[1]] < 0 || remap[t[2]] < 0) continue;
    out.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
  }
  return out;
}

}  // namespace objrecon::mesh
