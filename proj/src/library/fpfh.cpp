#include <cmath>

#include "objrecon/core/kdtree.hpp"
#include "objrecon/library/features.hpp"

namespace objrecon::library {

namespace {

constexpr int kBins = 11;

// Darboux-frame angular features of an oriented point pair.
bool pair_features(const Vec3& p, const Vec3& np, const Vec3& q, const Vec3& nq, double& alpha,
                   double& phi, double& theta) {
  Vec3 dp = q - p;
  double d = dp.norm();
  if (d < 1e-12) return false;
  Vec3 u = np;
  Vec3 v = dp.cross(u);
  double vn = v.norm();
  if (vn < 1e-12) return false;
  v /= vn;
  Vec3 w = u.cross(v);
  alpha = v.dot(nq);
  phi = u.dot(dp) / d;
  theta = std::atan2(w.dot(nq), u.dot(nq));
  return true;
}

void add_pair_to_histogram(double alpha, double phi, double theta, double weight, double* hist) {
  auto bin = [](double value, double lo, double hi) {
    int b = static_cast<int>((value - lo) / (hi - lo) * kBins);
    return std::clamp(b, 0, kBins - 1);
  };
  hist[bin(alpha, -1.0, 1.0)] += weight;
  hist[kBins + bin(phi, -1.0, 1.0)] += weight;
  hist[2 * kBins + bin(theta, -M_PI, M_PI)] += weight;
}

}  // namespace

FpfhFeatures compute_fpfh(const PointCloud& cloud, double radius) {
  if (!cloud.has_normals()) throw std::invalid_argument("fpfh requires normals");
  if (!(radius > 0)) throw std::invalid_argument("fpfh radius must be positive");

  const size_t n = cloud.size();
  KdTree3 tree(cloud.points);
  std::vector<std::vector<int>> neighborhoods(n);
  for (size_t i = 0; i < n; ++i) {
    std::vector<int> nn = tree.radius_search(cloud.points[i], radius);
    std::erase(nn, static_cast<int>(i));
    neighborhoods[i] = std::move(nn);
  }

  // First pass: simplified histograms per point, each block in percent.
  std::vector<Eigen::VectorXd> spfh(n, Eigen::VectorXd::Zero(kFpfhSize));
  for (size_t i = 0; i < n; ++i) {
    const auto& nn = neighborhoods[i];
    if (nn.empty()) continue;
    double incr = 100.0 / static_cast<double>(nn.size());
    for (int j : nn) {
      double alpha, phi, theta;
      if (!pair_features(cloud.points[i], cloud.normals[i], cloud.points[j], cloud.normals[j],
                         alpha, phi, theta))
        continue;
      add_pair_to_histogram(alpha, phi, theta, incr, spfh[i].data());
    }
  }

  // Second pass: distance-weighted aggregation over the neighborhood.
  FpfhFeatures out;
  out.features.assign(n, Eigen::VectorXd::Zero(kFpfhSize));
  out.isolated.assign(n, 0);
  for (size_t i = 0; i < n; ++i) {
    const auto& nn = neighborhoods[i];
    if (nn.empty()) {
      out.isolated[i] = 1;
      continue;
    }
    Eigen::VectorXd f = spfh[i];
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(kFpfhSize);
    for (int j : nn) {
      double dist = (cloud.points[i] - cloud.points[j]).norm();
      if (dist < 1e-12) continue;
      weighted += spfh[j] / dist;
    }
    f += weighted / static_cast<double>(nn.size());
    // per-feature-block percentage normalization
    for (int b = 0; b < 3; ++b) {
      double sum = f.segment(b * kBins, kBins).sum();
      if (sum > 0) f.segment(b * kBins, kBins) *= 100.0 / sum;
    }
    out.features[i] = f;
  }
  return out;
}

}  // namespace objrecon::library
