#pragma once

#include <functional>

#include "objrecon/field/model.hpp"
#include "objrecon/mesh/mesh.hpp"

namespace objrecon::mesh {

/// Marching cubes over a scalar field sampled on a regular lattice.
/// `values` holds nx*ny*nz samples indexed (z * ny + y) * nx + x; lattice
/// point (i,j,k) sits at origin + spacing * (i,j,k). Shared edge vertices are
/// welded and degenerate triangles dropped.
TriangleMesh marching_cubes(const std::vector<double>& values, int nx, int ny, int nz,
                            const Vec3& origin, double spacing, double iso_level);

/// Iso-surface of a model's occupancy field at the 1/2 level set, sampled at
/// `resolution` meter spacing over the model box (one extra lattice layer
/// outside the box carries zero occupancy so surfaces close at the border).
/// Vertices are world-space; colors decoded per vertex when with_colors.
TriangleMesh extract_mesh(const field::ObjectModel& model, double resolution,
                          bool with_colors = false);

}  // namespace objrecon::mesh
