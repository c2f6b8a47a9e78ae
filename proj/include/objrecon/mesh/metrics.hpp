#pragma once

#include "objrecon/mesh/mesh.hpp"

namespace objrecon::mesh {

struct MetricReport {
  double accuracy_cm = 0;
  double completion_cm = 0;
  std::vector<double> thresholds_m;       // as queried
  std::vector<double> completion_ratios;  // percent, aligned with thresholds_m
};

/// Mean distance (cm) from every reconstructed vertex to its nearest
/// ground-truth vertex. Throws when either mesh is empty.
double accuracy_cm(const TriangleMesh& reconstructed, const TriangleMesh& ground_truth);

/// Mean distance (cm) from every ground-truth vertex to its nearest
/// reconstructed vertex.
double completion_cm(const TriangleMesh& reconstructed, const TriangleMesh& ground_truth);

/// Percentage of ground-truth vertices whose nearest reconstructed vertex is
/// within threshold_m.
double completion_ratio(const TriangleMesh& reconstructed, const TriangleMesh& ground_truth,
                        double threshold_m);

MetricReport evaluate_mesh(const TriangleMesh& reconstructed, const TriangleMesh& ground_truth,
                           const std::vector<double>& thresholds_m);

}  // namespace objrecon::mesh
