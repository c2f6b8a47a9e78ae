#include "objrecon/synth/gt_mesh.hpp"

#include <cmath>
#include <map>

namespace objrecon::synth {

using mesh::TriangleMesh;

namespace {

TriangleMesh sphere_mesh(double radius, double resolution) {
  int stacks = std::max(8, static_cast<int>(std::ceil(M_PI * radius / resolution)));
  int slices = std::max(12, static_cast<int>(std::ceil(2.0 * M_PI * radius / resolution)));
  TriangleMesh m;
  // rings (excluding poles), then the two pole vertices
  for (int i = 1; i < stacks; ++i) {
    double theta = M_PI * i / stacks;  // from +z pole
    for (int j = 0; j < slices; ++j) {
      double phi = 2.0 * M_PI * j / slices;
      m.vertices.emplace_back(radius * std::sin(theta) * std::cos(phi),
                              radius * std::sin(theta) * std::sin(phi),
                              radius * std::cos(theta));
    }
  }
  int top = static_cast<int>(m.vertices.size());
  m.vertices.emplace_back(0, 0, radius);
  int bottom = top + 1;
  m.vertices.emplace_back(0, 0, -radius);

  auto ring = [&](int i, int j) { return (i - 1) * slices + (j % slices); };
  for (int j = 0; j < slices; ++j) {
    m.triangles.push_back({top, ring(1, j), ring(1, j + 1)});
    m.triangles.push_back({bottom, ring(stacks - 1, j + 1), ring(stacks - 1, j)});
  }
  for (int i = 1; i + 1 < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      int a = ring(i, j), b = ring(i, j + 1), c = ring(i + 1, j), d = ring(i + 1, j + 1);
      m.triangles.push_back({a, c, b});
      m.triangles.push_back({b, c, d});
    }
  }
  return m;
}

TriangleMesh box_mesh(const Vec3& size, double resolution) {
  TriangleMesh m;
  Vec3 half = size * 0.5;
  // one subdivided quad per face
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign = -1; sign <= 1; sign += 2) {
      int u_axis = (axis + 1) % 3, v_axis = (axis + 2) % 3;
      int nu = std::max(1, static_cast<int>(std::ceil(size[u_axis] / resolution)));
      int nv = std::max(1, static_cast<int>(std::ceil(size[v_axis] / resolution)));
      int base = static_cast<int>(m.vertices.size());
      for (int v = 0; v <= nv; ++v) {
        for (int u = 0; u <= nu; ++u) {
          Vec3 p;
          p[axis] = sign * half[axis];
          p[u_axis] = -half[u_axis] + size[u_axis] * u / nu;
          p[v_axis] = -half[v_axis] + size[v_axis] * v / nv;
          m.vertices.push_back(p);
        }
      }
      for (int v = 0; v < nv; ++v) {
        for (int u = 0; u < nu; ++u) {
          int a = base + v * (nu + 1) + u;
          int b = a + 1;
          int c = a + (nu + 1);
          int d = c + 1;
          if (sign > 0) {
            m.triangles.push_back({a, b, c});
            m.triangles.push_back({b, d, c});
          } else {
            m.triangles.push_back({a, c, b});
            m.triangles.push_back({b, c, d});
          }
        }
      }
    }
  }
  return m;
}

TriangleMesh cylinder_mesh(double radius, double height, double resolution) {
  int slices = std::max(12, static_cast<int>(std::ceil(2.0 * M_PI * radius / resolution)));
  int stacks = std::max(1, static_cast<int>(std::ceil(height / resolution)));
  int rings = std::max(1, static_cast<int>(std::ceil(radius / resolution)));
  double half_h = height * 0.5;
  TriangleMesh m;
  // lateral rings
  for (int i = 0; i <= stacks; ++i) {
    double z = -half_h + height * i / stacks;
    for (int j = 0; j < slices; ++j) {
      double phi = 2.0 * M_PI * j / slices;
      m.vertices.emplace_back(radius * std::cos(phi), radius * std::sin(phi), z);
    }
  }
  auto lat = [&](int i, int j) { return i * slices + (j % slices); };
  for (int i = 0; i < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      int a = lat(i, j), b = lat(i, j + 1), c = lat(i + 1, j), d = lat(i + 1, j + 1);
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({b, d, c});
    }
  }
  // caps as concentric rings closed by a center vertex
  for (int sign = -1; sign <= 1; sign += 2) {
    double z = sign * half_h;
    int base = static_cast<int>(m.vertices.size());
    for (int r = 1; r <= rings; ++r) {
      double rr = radius * r / rings;
      for (int j = 0; j < slices; ++j) {
        double phi = 2.0 * M_PI * j / slices;
        m.vertices.emplace_back(rr * std::cos(phi), rr * std::sin(phi), z);
      }
    }
    int center = static_cast<int>(m.vertices.size());
    m.vertices.emplace_back(0, 0, z);
    auto cap = [&](int r, int j) { return base + (r - 1) * slices + (j % slices); };
    for (int j = 0; j < slices; ++j) {
      if (sign > 0)
        m.triangles.push_back({center, cap(1, j), cap(1, j + 1)});
      else
        m.triangles.push_back({center, cap(1, j + 1), cap(1, j)});
    }
    for (int r = 1; r < rings; ++r) {
      for (int j = 0; j < slices; ++j) {
        int a = cap(r, j), b = cap(r, j + 1), c = cap(r + 1, j), d = cap(r + 1, j + 1);
        if (sign > 0) {
          m.triangles.push_back({a, c, b});
          m.triangles.push_back({b, c, d});
        } else {
          m.triangles.push_back({a, b, c});
          m.triangles.push_back({b, d, c});
        }
      }
    }
  }
  return m;
}

}  // namespace

TriangleMesh ground_truth_mesh(const Primitive& prim, double resolution) {
  if (!(resolution > 0)) throw std::invalid_argument("resolution must be positive");
  prim.validate();
  TriangleMesh m;
  switch (prim.kind) {
    case PrimitiveKind::sphere:
      m = sphere_mesh(prim.size.x(), resolution);
      break;
    case PrimitiveKind::box:
      m = box_mesh(prim.size, resolution);
      break;
    case PrimitiveKind::cylinder:
      m = cylinder_mesh(prim.size.x(), prim.size.z(), resolution);
      break;
  }
  m.transform(prim.pose.rotation, prim.pose.translation);
  return m;
}

}  // namespace objrecon::synth
