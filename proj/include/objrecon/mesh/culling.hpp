#pragma once

#include "objrecon/core/types.hpp"
#include "objrecon/mesh/mesh.hpp"

namespace objrecon::mesh {

/// Removes vertices never observed in the given frames: a vertex survives iff
/// some frame projects it inside the image at a valid depth pixel with
/// reprojected depth <= measured depth + tau. Triangles touching a removed
/// vertex are dropped.
TriangleMesh cull_unseen(const TriangleMesh& mesh, const std::vector<Frame>& frames, double tau);

}  // namespace objrecon::mesh
