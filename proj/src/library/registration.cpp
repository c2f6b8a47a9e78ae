#include "objrecon/library/registration.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "objrecon/core/kdtree.hpp"
#include "objrecon/core/ops.hpp"

namespace objrecon::library {

Pose kabsch(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  if (src.size() != dst.size() || src.size() < 3)
    throw std::invalid_argument("kabsch needs >= 3 paired points");
  Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= static_cast<double>(src.size());
  cd /= static_cast<double>(src.size());
  Mat3 h = Mat3::Zero();
  for (size_t i = 0; i < src.size(); ++i) h += (src[i] - cs) * (dst[i] - cd).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() > 0 ? 1.0 : -1.0;
  Pose pose;
  pose.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  pose.translation = cd - pose.rotation * cs;
  return pose;
}

Mat3 rotation_exp(const Vec3& omega) {
  double angle = omega.norm();
  if (angle < 1e-12) return Mat3::Identity();
  Vec3 axis = omega / angle;
  Mat3 k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Mat3::Identity() + std::sin(angle) * k + (1 - std::cos(angle)) * k * k;
}

namespace {

struct Evaluation {
  double fitness = 0;
  double rmse = 0;
};

Evaluation evaluate_alignment(const PointCloud& src, const KdTree3& dst_tree, const Pose& t,
                              double inlier_distance) {
  size_t inliers = 0;
  double sq_sum = 0;
  for (const Vec3& p : src.points) {
    auto nn = dst_tree.nearest(t.apply(p));
    if (nn.distance <= inlier_distance) {
      inliers++;
      sq_sum += nn.distance * nn.distance;
    }
  }
  Evaluation e;
  e.fitness = static_cast<double>(inliers) / static_cast<double>(src.size());
  e.rmse = inliers ? std::sqrt(sq_sum / inliers) : 0.0;
  return e;
}

}  // namespace

RegistrationResult ransac_register(const PointCloud& src, const FpfhFeatures& src_fpfh,
                                   const PointCloud& dst, const FpfhFeatures& dst_fpfh,
                                   const RegistrationParams& params, std::mt19937_64& rng) {
  if (src.size() < 4 || dst.size() < 4)
    throw std::invalid_argument("ransac needs >= 4 points per cloud");

  // Feature-space nearest neighbor per src point (brute force in 33-d).
  std::vector<int> corr(src.size(), -1);
  for (size_t i = 0; i < src.size(); ++i) {
    if (src_fpfh.isolated[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < dst.size(); ++j) {
      if (dst_fpfh.isolated[j]) continue;
      double d2 = (src_fpfh.features[i] - dst_fpfh.features[j]).squaredNorm();
      if (d2 < best) {
        best = d2;
        corr[i] = static_cast<int>(j);
      }
    }
  }
  std::vector<int> usable;
  for (size_t i = 0; i < src.size(); ++i)
    if (corr[i] >= 0) usable.push_back(static_cast<int>(i));

  RegistrationResult best;
  if (static_cast<int>(usable.size()) < params.ransac_sample_size) return best;

  KdTree3 dst_tree(dst.points);
  std::uniform_int_distribution<size_t> pick(0, usable.size() - 1);
  const int n_sample = params.ransac_sample_size;
  std::vector<Vec3> sample_src(n_sample), sample_dst(n_sample);
  std::vector<int> chosen(n_sample);

  int max_iters = params.max_iterations;
  for (int iter = 0; iter < max_iters; ++iter) {
    for (int s = 0; s < n_sample; ++s) {
      bool fresh;
      do {
        chosen[s] = usable[pick(rng)];
        fresh = true;
        for (int t = 0; t < s; ++t) fresh &= chosen[t] != chosen[s];
      } while (!fresh);
      sample_src[s] = src.points[chosen[s]];
      sample_dst[s] = dst.points[corr[chosen[s]]];
    }

    // Prune samples whose pairwise edge lengths disagree.
    bool edges_ok = true;
    for (int a = 0; a < n_sample && edges_ok; ++a) {
      for (int b = a + 1; b < n_sample; ++b) {
        double ls = (sample_src[a] - sample_src[b]).norm();
        double ld = (sample_dst[a] - sample_dst[b]).norm();
        if (ls < params.edge_length_similarity * ld || ld < params.edge_length_similarity * ls) {
          edges_ok = false;
          break;
        }
      }
    }
    if (!edges_ok) continue;

    Pose t = kabsch(sample_src, sample_dst);
    Evaluation e = evaluate_alignment(src, dst_tree, t, params.inlier_distance);
    if (e.fitness > best.fitness ||
        (e.fitness == best.fitness && e.rmse < best.inlier_rmse)) {
      best.transform = t;
      best.fitness = e.fitness;
      best.inlier_rmse = e.rmse;
      if (best.fitness > 0) {
        double p_all = std::pow(best.fitness, n_sample);
        if (p_all >= 1.0) break;
        double needed = std::log(1.0 - params.confidence) / std::log(1.0 - p_all);
        max_iters = std::min(max_iters, iter + 1 + static_cast<int>(std::ceil(needed)));
      }
    }
  }
  return best;
}

RegistrationResult icp_point_to_plane(const PointCloud& src, const PointCloud& dst,
                                      const Pose& init, const RegistrationParams& params) {
  if (!dst.has_normals()) throw std::invalid_argument("point-to-plane icp needs dst normals");
  KdTree3 dst_tree(dst.points);

  Pose t = init;
  RegistrationResult result;
  result.transform = init;
  double prev_fitness = -1, prev_rmse = -1;

  for (int iter = 0; iter < params.icp_max_iterations; ++iter) {
    Eigen::Matrix<double, 6, 6> ata = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> atb = Eigen::Matrix<double, 6, 1>::Zero();
    size_t matched = 0;
    double sq_sum = 0;
    for (const Vec3& p : src.points) {
      Vec3 q = t.apply(p);
      auto nn = dst_tree.nearest(q);
      if (nn.index < 0 || nn.distance > params.icp_max_correspondence) continue;
      const Vec3& d = dst.points[nn.index];
      const Vec3& n = dst.normals[nn.index];
      double r = n.dot(q - d);
      Eigen::Matrix<double, 6, 1> j;
      j.head<3>() = q.cross(n);
      j.tail<3>() = n;
      ata += j * j.transpose();
      atb += j * r;
      matched++;
      sq_sum += r * r;
    }
    if (matched == 0) {
      result.fitness = 0;
      result.inlier_rmse = 0;
      return result;
    }

    Eigen::Matrix<double, 6, 1> xi = ata.ldlt().solve(-atb);
    Pose delta;
    delta.rotation = rotation_exp(xi.head<3>());
    delta.translation = xi.tail<3>();
    t = delta.compose(t);

    Evaluation e = evaluate_alignment(src, dst_tree, t, params.inlier_distance);
    result.transform = t;
    result.fitness = e.fitness;
    result.inlier_rmse = e.rmse;
    if (std::abs(e.fitness - prev_fitness) < params.icp_relative_eps &&
        std::abs(e.rmse - prev_rmse) < params.icp_relative_eps)
      break;
    prev_fitness = e.fitness;
    prev_rmse = e.rmse;
  }
  return result;
}

bool verify_registration(const Pose& object_to_world, const PointCloud& object_cloud,
                         const Frame& frame, int instance_id, const VerificationParams& params) {
  size_t visible = 0, in_mask = 0;
  for (const Vec3& p_obj : object_cloud.points) {
    Vec3 p = object_to_world.apply(p_obj);
    PixelProjection proj = project_point(p, frame.pose, frame.intrinsics);
    if (!proj.in_front) continue;
    int u = static_cast<int>(std::lround(proj.u));
    int v = static_cast<int>(std::lround(proj.v));
    if (!frame.masks.contains(u, v)) continue;
    visible++;
    if (frame.masks.at(u, v) == instance_id) in_mask++;
    float measured = frame.depth.at(u, v);
    if (measured > 0 && proj.depth < measured - params.depth_tolerance) return false;
  }
  if (visible == 0) return false;
  return static_cast<double>(in_mask) >= params.min_mask_fraction * static_cast<double>(visible);
}

}  // namespace objrecon::library
