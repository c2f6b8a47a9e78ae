#include "objrecon/mesh/metrics.hpp"

#include "objrecon/core/kdtree.hpp"

namespace objrecon::mesh {

namespace {

double mean_nn_distance(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
  if (from.empty() || to.empty())
    throw std::invalid_argument("metrics require non-empty vertex sets");
  KdTree3 tree(to);
  double sum = 0;
  for (const Vec3& p : from) sum += tree.nearest(p).distance;
  return sum / static_cast<double>(from.size());
}

}  // namespace

double accuracy_cm(const TriangleMesh& reconstructed, const TriangleMesh& ground_truth) {
  return 100.0 * mean_nn_distance(reconstructed.vertices, ground_truth.vertices);
}

double completion_cm(const TriangleMesh& reconstructed, const TriangleMesh& ground_truth) {
  return 100.0 * mean_nn_distance(ground_truth.vertices, reconstructed.vertices);
}

double completion_ratio(const TriangleMesh& reconstructed, const TriangleMesh& ground_truth,
                        double threshold_m) {
  if (reconstructed.empty() || ground_truth.empty())
    throw std::invalid_argument("metrics require non-empty vertex sets");
  KdTree3 tree(reconstructed.vertices);
  size_t within = 0;
  for (const Vec3& p : ground_truth.vertices)
    if (tree.nearest(p).distance < threshold_m) within++;
  return 100.0 * static_cast<double>(within) / static_cast<double>(ground_truth.vertices.size());
}

MetricReport evaluate_mesh(const TriangleMesh& reconstructed, const TriangleMesh& ground_truth,
                           const std::vector<double>& thresholds_m) {
  MetricReport report;
  report.accuracy_cm = accuracy_cm(reconstructed, ground_truth);
  report.completion_cm = completion_cm(reconstructed, ground_truth);
  report.thresholds_m = thresholds_m;
  KdTree3 tree(reconstructed.vertices);
  for (double thr : thresholds_m) {
    size_t within = 0;
    for (const Vec3& p : ground_truth.vertices)
      if (tree.nearest(p).distance < thr) within++;
    report.completion_ratios.push_back(100.0 * static_cast<double>(within) /
                                       static_cast<double>(ground_truth.vertices.size()));
  }
  return report;
}

}  // namespace objrecon::mesh
