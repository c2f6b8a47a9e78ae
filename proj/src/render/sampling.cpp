#include "objrecon/render/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace objrecon::render {

std::vector<double> sample_ray_depths(double measured_depth, double box_near,
                                      const RaySampleConfig& cfg, std::mt19937_64& rng) {
  if (!(measured_depth > 0)) throw std::invalid_argument("measured depth must be positive");
  std::normal_distribution<double> surface(measured_depth, cfg.sigma);
  std::vector<double> depths;
  depths.reserve(cfg.n_total);
  for (int i = 0; i < cfg.n_surface; ++i) depths.push_back(surface(rng));

  double band_start = measured_depth - 3.0 * cfg.sigma;
  if (band_start > box_near) {
    std::uniform_real_distribution<double> uniform(box_near, band_start);
    for (int i = cfg.n_surface; i < cfg.n_total; ++i) depths.push_back(uniform(rng));
  } else {
    for (int i = cfg.n_surface; i < cfg.n_total; ++i) depths.push_back(surface(rng));
  }
  for (double& d : depths) d = std::max(d, 1e-6);
  std::sort(depths.begin(), depths.end());
  return depths;
}

std::vector<double> sample_uniform_depths(double near, double far, int count,
                                          std::mt19937_64& rng) {
  std::vector<double> depths(count);
  if (far <= near) {
    std::fill(depths.begin(), depths.end(), std::max(near, 1e-6));
    return depths;
  }
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  double step = (far - near) / count;
  for (int i = 0; i < count; ++i) depths[i] = std::max(near + (i + jitter(rng)) * step, 1e-6);
  return depths;
}

std::vector<double> stratified_midpoints(double near, double far, int count) {
  std::vector<double> depths(count);
  double step = (far - near) / count;
  for (int i = 0; i < count; ++i) depths[i] = near + (i + 0.5) * step;
  return depths;
}

bool ray_box_span(const Vec3& origin, const Vec3& dir, const BoxTransform& box, double& t_near,
                  double& t_far) {
  // Work in the box frame: local = R^T (p - center), slab half-widths extent/2.
  Vec3 o = box.rotation.transpose() * (origin - box.center);
  Vec3 d = box.rotation.transpose() * dir;
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    double half = 0.5 * box.extent[a];
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < -half || o[a] > half) return false;
      continue;
    }
    double ta = (-half - o[a]) / d[a];
    double tb = (half - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  t_near = std::max(t0, 1e-6);
  t_far = t1;
  return t_far > t_near;
}

}  // namespace objrecon::render
