#include "objrecon/field/grid.hpp"

#include <algorithm>

namespace objrecon::field {

namespace {
// Snap interpolation coordinates that are numerically on a vertex, so that
// identity remappings reproduce stored features exactly.
constexpr double kSnapEps = 1e-9;
}

double FeatureGrid::random_feature(std::mt19937_64& rng, double init_scale) {
  std::uniform_real_distribution<float> dist(static_cast<float>(-init_scale),
                                             static_cast<float>(init_scale));
  return dist(rng);
}

FeatureGrid FeatureGrid::create(const GridConfig& cfg, std::mt19937_64& rng, double init_scale) {
  cfg.validate();
  FeatureGrid grid;
  grid.config = cfg;
  grid.levels.resize(cfg.levels);
  for (int l = 0; l < cfg.levels; ++l) {
    size_t side = cfg.level_side(l);
    grid.levels[l].resize(side * side * side);
    for (double& f : grid.levels[l]) f = random_feature(rng, init_scale);
  }
  return grid;
}

CellFootprint FeatureGrid::footprint(int level, const Vec3& x) const {
  const int side = config.level_side(level);
  CellFootprint fp;
  int idx[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    double u = std::clamp(x[a], 0.0, 1.0) * (side - 1);
    double r = std::round(u);
    if (std::abs(u - r) < kSnapEps) u = r;
    int i = std::min(static_cast<int>(std::floor(u)), side - 2);
    i = std::max(i, 0);
    idx[a] = i;
    frac[a] = u - i;
  }
  for (int c = 0; c < 8; ++c) {
    int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
    fp.corner[c] = (idx[2] + dz) * side * side + (idx[1] + dy) * side + (idx[0] + dx);
    fp.weight[c] = (dx ? frac[0] : 1.0 - frac[0]) * (dy ? frac[1] : 1.0 - frac[1]) *
                   (dz ? frac[2] : 1.0 - frac[2]);
  }
  return fp;
}

double FeatureGrid::interpolate_level(int level, const Vec3& x) const {
  CellFootprint fp = footprint(level, x);
  const std::vector<double>& table = levels[level];
  double v = 0;
  for (int c = 0; c < 8; ++c) v += fp.weight[c] * table[fp.corner[c]];
  return v;
}

void FeatureGrid::encode(const Vec3& x, double* out) const {
  for (int l = 0; l < config.levels; ++l) out[l] = interpolate_level(l, x);
}

BoxTransform box_change(const BoxTransform& old_box, const BoxTransform& new_box) {
  Mat3 rel = old_box.rotation.transpose() * new_box.rotation;
  if ((rel - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("box orientation must be preserved across updates");
  BoxTransform delta;
  delta.rotation = Mat3::Identity();
  delta.extent = new_box.extent.cwiseQuotient(old_box.extent);
  delta.center = Vec3::Constant(0.5) +
                 (old_box.rotation.transpose() * (new_box.center - old_box.center))
                     .cwiseQuotient(old_box.extent);
  return delta;
}

FeatureGrid reinterpolate_grid(const FeatureGrid& old_grid, const BoxTransform& new_to_old,
                               std::mt19937_64& rng, double init_scale) {
  FeatureGrid out;
  out.config = old_grid.config;
  out.levels.resize(out.config.levels);
  constexpr double eps = 1e-9;
  for (int l = 0; l < out.config.levels; ++l) {
    const int side = out.config.level_side(l);
    out.levels[l].resize(static_cast<size_t>(side) * side * side);
    size_t i = 0;
    for (int z = 0; z < side; ++z) {
      for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x, ++i) {
          Vec3 q_new(static_cast<double>(x) / (side - 1), static_cast<double>(y) / (side - 1),
                     static_cast<double>(z) / (side - 1));
          Vec3 q_old = new_to_old.from_box(q_new);
          if (q_old.minCoeff() >= -eps && q_old.maxCoeff() <= 1.0 + eps) {
            out.levels[l][i] = old_grid.interpolate_level(l, q_old);
          } else {
            out.levels[l][i] = FeatureGrid::random_feature(rng, init_scale);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace objrecon::field
