#include "objrecon/library/descriptor.hpp"

#include <cmath>

namespace objrecon::library {

ObjectView view_from_frame(const Frame& frame, int instance_id) {
  ObjectView view;
  view.color = frame.color;
  view.depth = frame.depth;
  view.intrinsics = frame.intrinsics;
  view.mask = ImageF(frame.masks.width, frame.masks.height, 1, 0.0f);
  for (size_t i = 0; i < frame.masks.data.size(); ++i)
    view.mask.data[i] = frame.masks.data[i] == instance_id ? 1.0f : 0.0f;
  return view;
}

ObjectView view_from_render(const render::RenderedView& rendered) {
  return {rendered.color, rendered.depth, rendered.mask, rendered.intrinsics};
}

namespace {

constexpr int kColorBins = 16;
constexpr int kNormalBins = 16;

// Camera-frame point of a pixel, or nullopt when invalid.
inline bool masked_valid(const ObjectView& v, int x, int y) {
  return v.mask.at(x, y) >= 0.5f && v.depth.at(x, y) > 0;
}

inline Vec3 pixel_point(const ObjectView& v, int x, int y) {
  double d = v.depth.at(x, y);
  return Vec3((x - v.intrinsics.cx) * d / v.intrinsics.fx,
              (y - v.intrinsics.cy) * d / v.intrinsics.fy, d);
}

void l1_normalize(double* block, int n) {
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += block[i];
  if (sum > 0)
    for (int i = 0; i < n; ++i) block[i] /= sum;
}

}  // namespace

Eigen::VectorXd compute_view_descriptor(std::span<const ObjectView> views) {
  if (views.empty()) throw std::invalid_argument("descriptor needs at least one view");

  Eigen::VectorXd accum = Eigen::VectorXd::Zero(kDescriptorSize);
  int used_views = 0;
  for (const ObjectView& view : views) {
    Eigen::VectorXd desc = Eigen::VectorXd::Zero(kDescriptorSize);
    bool any = false;
    for (int y = 0; y < view.mask.height; ++y) {
      for (int x = 0; x < view.mask.width; ++x) {
        if (view.mask.at(x, y) < 0.5f) continue;
        any = true;
        for (int c = 0; c < 3; ++c) {
          double value = std::clamp<double>(view.color.at(x, y, c), 0.0, 1.0);
          int bin = std::min(static_cast<int>(value * kColorBins), kColorBins - 1);
          desc[c * kColorBins + bin] += 1.0;
        }
      }
    }
    if (!any) continue;

    // Normal-angle histogram from central depth differences.
    for (int y = 1; y + 1 < view.mask.height; ++y) {
      for (int x = 1; x + 1 < view.mask.width; ++x) {
        if (!masked_valid(view, x, y) || !masked_valid(view, x - 1, y) ||
            !masked_valid(view, x + 1, y) || !masked_valid(view, x, y - 1) ||
            !masked_valid(view, x, y + 1))
          continue;
        Vec3 p = pixel_point(view, x, y);
        Vec3 du = pixel_point(view, x + 1, y) - pixel_point(view, x - 1, y);
        Vec3 dv = pixel_point(view, x, y + 1) - pixel_point(view, x, y - 1);
        Vec3 n = du.cross(dv);
        double len = n.norm();
        if (len < 1e-12) continue;
        n /= len;
        double cos_angle = std::abs(n.dot(p.normalized()));
        double angle = std::acos(std::clamp(cos_angle, 0.0, 1.0));  // [0, pi/2]
        int bin = std::min(static_cast<int>(angle / (M_PI / 2) * kNormalBins), kNormalBins - 1);
        desc[3 * kColorBins + bin] += 1.0;
      }
    }

    for (int c = 0; c < 3; ++c) l1_normalize(desc.data() + c * kColorBins, kColorBins);
    l1_normalize(desc.data() + 3 * kColorBins, kNormalBins);
    accum += desc;
    used_views++;
  }

  if (used_views == 0) throw std::invalid_argument("all descriptor views are empty");
  accum /= used_views;
  double norm = accum.norm();
  if (norm > 0) accum /= norm;
  return accum;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double na = a.norm(), nb = b.norm();
  if (na == 0 || nb == 0) return 0;
  return a.dot(b) / (na * nb);
}

}  // namespace objrecon::library
