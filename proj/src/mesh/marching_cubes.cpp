#include "objrecon/mesh/marching_cubes.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace objrecon::mesh {

namespace {

#include "mc_tables.inc"

// Corner offsets in the Lorensen & Cline ordering.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdgeEnds[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                  {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

}  // namespace

TriangleMesh marching_cubes(const std::vector<double>& values, int nx, int ny, int nz,
                            const Vec3& origin, double spacing, double iso) {
  TriangleMesh out;
  if (nx < 2 || ny < 2 || nz < 2) return out;
  auto value_at = [&](int x, int y, int z) {
    return values[(static_cast<size_t>(z) * ny + y) * nx + x];
  };
  auto lattice_index = [&](int x, int y, int z) {
    return (static_cast<uint64_t>(z) * ny + y) * nx + x;
  };

  // Welds vertices by the undirected lattice edge they lie on.
  std::unordered_map<uint64_t, int> edge_vertex;
  auto vertex_on_edge = [&](int x0, int y0, int z0, int x1, int y1, int z1) {
    uint64_t i0 = lattice_index(x0, y0, z0);
    uint64_t i1 = lattice_index(x1, y1, z1);
    int axis = x0 != x1 ? 0 : (y0 != y1 ? 1 : 2);
    uint64_t key = std::min(i0, i1) * 3 + axis;
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;

    double v0 = value_at(x0, y0, z0);
    double v1 = value_at(x1, y1, z1);
    double t = std::abs(v1 - v0) < 1e-30 ? 0.5 : (iso - v0) / (v1 - v0);
    t = std::clamp(t, 0.0, 1.0);
    Vec3 p0 = origin + spacing * Vec3(x0, y0, z0);
    Vec3 p1 = origin + spacing * Vec3(x1, y1, z1);
    int idx = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p0 + t * (p1 - p0));
    edge_vertex.emplace(key, idx);
    return idx;
  };

  for (int z = 0; z + 1 < nz; ++z) {
    for (int y = 0; y + 1 < ny; ++y) {
      for (int x = 0; x + 1 < nx; ++x) {
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          if (value_at(x + kCorner[c][0], y + kCorner[c][1], z + kCorner[c][2]) < iso)
            cube |= 1 << c;
        }
        if (kEdgeTable[cube] == 0) continue;

        int edge_verts[12];
        for (int e = 0; e < 12; ++e) {
          if (!(kEdgeTable[cube] & (1 << e))) continue;
          const int* a = kCorner[kEdgeEnds[e][0]];
          const int* b = kCorner[kEdgeEnds[e][1]];
          edge_verts[e] = vertex_on_edge(x + a[0], y + a[1], z + a[2],
                                         x + b[0], y + b[1], z + b[2]);
        }
        for (int t = 0; kTriTable[cube][t] != -1; t += 3) {
          int i0 = edge_verts[kTriTable[cube][t]];
          int i1 = edge_verts[kTriTable[cube][t + 1]];
          int i2 = edge_verts[kTriTable[cube][t + 2]];
          if (i0 == i1 || i1 == i2 || i2 == i0) continue;
          out.triangles.push_back({i0, i1, i2});
        }
      }
    }
  }
  return out;
}

TriangleMesh extract_mesh(const field::ObjectModel& model, double resolution, bool with_colors) {
  if (!(resolution > 0)) throw std::invalid_argument("mesh resolution must be positive");
  const Vec3 half = model.box.extent * 0.5;
  int n[3];
  Vec3 start;
  for (int a = 0; a < 3; ++a) {
    int interior = static_cast<int>(std::ceil(model.box.extent[a] / resolution)) + 1;
    n[a] = interior + 2;  // one closing layer outside the box on each side
    start[a] = -half[a] - resolution;
  }

  std::vector<double> occ(static_cast<size_t>(n[0]) * n[1] * n[2], 0.0);
  size_t i = 0;
  for (int z = 0; z < n[2]; ++z) {
    for (int y = 0; y < n[1]; ++y) {
      for (int x = 0; x < n[0]; ++x, ++i) {
        Vec3 local = start + resolution * Vec3(x, y, z);
        if ((local.cwiseAbs() - half).maxCoeff() > 0) continue;  // outside: stays empty
        Vec3 q = local.cwiseQuotient(model.box.extent) + Vec3::Constant(0.5);
        occ[i] = model.decode_occupancy(q);
      }
    }
  }

  TriangleMesh local_mesh = marching_cubes(occ, n[0], n[1], n[2], start, resolution, 0.5);
  if (with_colors) {
    local_mesh.colors.reserve(local_mesh.vertices.size());
    for (const Vec3& v : local_mesh.vertices) {
      Vec3 q = v.cwiseQuotient(model.box.extent) + Vec3::Constant(0.5);
      local_mesh.colors.push_back(model.decode_color(q));
    }
  }
  local_mesh.transform(model.box.rotation, model.box.center);
  return local_mesh;
}

}  // namespace objrecon::mesh
