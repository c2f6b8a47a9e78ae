#pragma once

#include <string>

#include "objrecon/mesh/mesh.hpp"

namespace objrecon::mesh {

/// Writes vertices (+ optional uchar colors) and faces. binary selects
/// binary_little_endian, otherwise ascii.
void write_ply(const TriangleMesh& mesh, const std::string& path, bool binary = true);

/// Reads ascii or binary_little_endian PLY with float/double vertex
/// coordinates, optional uchar colors and int-list faces.
TriangleMesh read_ply(const std::string& path);

}  // namespace objrecon::mesh
