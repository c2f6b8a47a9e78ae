#include "objrecon/synth/raycast.hpp"

#include <cmath>

namespace objrecon::synth {

namespace {

std::optional<double> sphere_hit(const Vec3& o, const Vec3& d, double radius, double t_min) {
  double a = d.squaredNorm();
  double b = 2.0 * o.dot(d);
  double c = o.squaredNorm() - radius * radius;
  double disc = b * b - 4 * a * c;
  if (disc < 0) return std::nullopt;
  double sq = std::sqrt(disc);
  double t0 = (-b - sq) / (2 * a);
  double t1 = (-b + sq) / (2 * a);
  if (t0 > t_min) return t0;
  if (t1 > t_min) return t1;
  return std::nullopt;
}

std::optional<double> box_hit(const Vec3& o, const Vec3& d, const Vec3& half, double t_min) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < -half[a] || o[a] > half[a]) return std::nullopt;
      continue;
    }
    double ta = (-half[a] - o[a]) / d[a];
    double tb = (half[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  if (t0 > t_min) return t0;
  if (t1 > t_min) return t1;
  return std::nullopt;
}

std::optional<double> cylinder_hit(const Vec3& o, const Vec3& d, double radius, double half_h,
                                   double t_min) {
  double best = std::numeric_limits<double>::infinity();
  // lateral surface
  double a = d.x() * d.x() + d.y() * d.y();
  if (a > 1e-15) {
    double b = 2.0 * (o.x() * d.x() + o.y() * d.y());
    double c = o.x() * o.x() + o.y() * o.y() - radius * radius;
    double disc = b * b - 4 * a * c;
    if (disc >= 0) {
      double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}) {
        if (t > t_min && t < best && std::abs(o.z() + t * d.z()) <= half_h) best = t;
      }
    }
  }
  // caps
  if (std::abs(d.z()) > 1e-15) {
    for (double zc : {-half_h, half_h}) {
      double t = (zc - o.z()) / d.z();
      if (t > t_min && t < best) {
        double x = o.x() + t * d.x(), y = o.y() + t * d.y();
        if (x * x + y * y <= radius * radius) best = t;
      }
    }
  }
  if (std::isfinite(best)) return best;
  return std::nullopt;
}

Vec3 local_normal(const Primitive& prim, const Vec3& p_local) {
  switch (prim.kind) {
    case PrimitiveKind::sphere:
      return p_local.normalized();
    case PrimitiveKind::box: {
      Vec3 half = prim.size * 0.5;
      Vec3 r = p_local.cwiseQuotient(half).cwiseAbs();
      int axis = 0;
      r.maxCoeff(&axis);
      Vec3 n = Vec3::Zero();
      n[axis] = p_local[axis] > 0 ? 1.0 : -1.0;
      return n;
    }
    case PrimitiveKind::cylinder: {
      double half_h = prim.size.z() * 0.5;
      if (std::abs(std::abs(p_local.z()) - half_h) < 1e-9)
        return Vec3(0, 0, p_local.z() > 0 ? 1.0 : -1.0);
      Vec3 n(p_local.x(), p_local.y(), 0);
      double len = n.norm();
      return len > 1e-12 ? Vec3(n / len) : Vec3(0, 0, 1);
    }
  }
  return Vec3::UnitZ();
}

}  // namespace

std::optional<RayHit> intersect(const Primitive& prim, const Vec3& origin, const Vec3& dir,
                                double t_min) {
  Vec3 o = prim.pose.apply_inverse(origin);
  Vec3 d = prim.pose.rotation.transpose() * dir;
  std::optional<double> t;
  switch (prim.kind) {
    case PrimitiveKind::sphere:
      t = sphere_hit(o, d, prim.size.x(), t_min);
      break;
    case PrimitiveKind::box:
      t = box_hit(o, d, prim.size * 0.5, t_min);
      break;
    case PrimitiveKind::cylinder:
      t = cylinder_hit(o, d, prim.size.x(), prim.size.z() * 0.5, t_min);
      break;
  }
  if (!t) return std::nullopt;
  RayHit hit;
  hit.t = *t;
  Vec3 n_local = local_normal(prim, o + *t * d);
  Vec3 n_world = prim.pose.rotation * n_local;
  if (n_world.dot(dir) > 0) n_world = -n_world;
  hit.normal = n_world;
  hit.primitive = &prim;
  return hit;
}

Frame raycast_frame(const std::vector<Primitive>& scene, const Pose& pose,
                    const Intrinsics& intrinsics, long frame_index, const RenderOptions& opts,
                    std::mt19937_64* rng) {
  Frame frame;
  frame.index = frame_index;
  frame.pose = pose;
  frame.intrinsics = intrinsics;
  frame.color = ImageF(intrinsics.width, intrinsics.height, 3, 0.0f);
  frame.depth = ImageF(intrinsics.width, intrinsics.height, 1, 0.0f);
  frame.masks = ImageU16(intrinsics.width, intrinsics.height, 1, 0);
  for (const Primitive& p : scene) frame.categories[p.instance_id] = p.category_id;

  std::normal_distribution<double> noise(0.0, opts.depth_noise_sigma);
  const Vec3 origin = pose.translation;
  for (int y = 0; y < intrinsics.height; ++y) {
    for (int x = 0; x < intrinsics.width; ++x) {
      // z-depth parameterization: point at depth d is origin + d * dir
      Vec3 dir_cam((x - intrinsics.cx) / intrinsics.fx, (y - intrinsics.cy) / intrinsics.fy, 1.0);
      Vec3 dir = pose.rotation * dir_cam;
      RayHit best;
      for (const Primitive& prim : scene) {
        auto hit = intersect(prim, origin, dir);
        if (hit && hit->t < best.t) best = *hit;
      }
      if (!best.primitive) continue;

      double depth = best.t;
      if (opts.depth_noise_sigma > 0 && rng) depth = std::max(1e-4, depth + noise(*rng));
      frame.depth.at(x, y) = static_cast<float>(depth);
      frame.masks.at(x, y) = static_cast<uint16_t>(best.primitive->instance_id);

      double shade = opts.ambient +
                     (1.0 - opts.ambient) * std::max(0.0, best.normal.dot(opts.light_dir));
      Vec3 c = best.primitive->albedo * shade;
      for (int ch = 0; ch < 3; ++ch) {
        double value = std::clamp(c[ch], 0.0, 1.0);
        if (opts.quantize_color) value = std::round(value * 255.0) / 255.0;
        frame.color.at(x, y, ch) = static_cast<float>(value);
      }
    }
  }
  return frame;
}

std::string to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::sphere: return "sphere";
    case PrimitiveKind::box: return "box";
    case PrimitiveKind::cylinder: return "cylinder";
  }
  return "sphere";
}

PrimitiveKind primitive_kind_from_string(const std::string& name) {
  if (name == "sphere") return PrimitiveKind::sphere;
  if (name == "box") return PrimitiveKind::box;
  if (name == "cylinder") return PrimitiveKind::cylinder;
  throw std::invalid_argument("unknown primitive kind: " + name);
}

}  // namespace objrecon::synth
