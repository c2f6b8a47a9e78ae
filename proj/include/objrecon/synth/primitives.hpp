#pragma once

#include <optional>
#include <string>
#include <vector>

#include "objrecon/core/types.hpp"

namespace objrecon::synth {

enum class PrimitiveKind { sphere, box, cylinder };

/// Analytic scene element. Size parameters: sphere uses size.x() as radius;
/// box uses size as full edge lengths; cylinder uses size.x() as radius and
/// size.z() as full height (axis along local z).
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::sphere;
  Pose pose;  // object-to-world
  Vec3 size = Vec3::Constant(0.1);
  Vec3 albedo = Vec3::Constant(0.7);
  int instance_id = 1;
  int category_id = 0;

  void validate() const {
    if (!(size.minCoeff() > 0)) throw std::invalid_argument("primitive size must be positive");
  }
};

struct RayHit {
  double t = std::numeric_limits<double>::infinity();
  Vec3 normal = Vec3::UnitZ();  // world space, facing the ray origin
  const Primitive* primitive = nullptr;
};

/// Nearest intersection of origin + t * dir (t > t_min) with one primitive.
std::optional<RayHit> intersect(const Primitive& prim, const Vec3& origin, const Vec3& dir,
                                double t_min = 1e-9);

PrimitiveKind primitive_kind_from_string(const std::string& name);
std::string to_string(PrimitiveKind kind);

}  // namespace objrecon::synth
