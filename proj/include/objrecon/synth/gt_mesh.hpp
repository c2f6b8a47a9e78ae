#pragma once

#include "objrecon/mesh/mesh.hpp"
#include "objrecon/synth/primitives.hpp"

namespace objrecon::synth {

/// Analytic triangulation of a primitive at roughly the requested edge
/// length, posed in world space. Exact: sphere vertices lie on the sphere,
/// box vertices on the box, etc.
mesh::TriangleMesh ground_truth_mesh(const Primitive& prim, double resolution);

}  // namespace objrecon::synth
