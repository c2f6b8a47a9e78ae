#include "objrecon/render/composite.hpp"

#include <stdexcept>

namespace objrecon::render {

RenderSample composite(std::span<const double> occupancies, std::span<const Vec3> colors,
                       std::span<const double> depths) {
  const size_t n = occupancies.size();
  if (n == 0 || colors.size() != n || depths.size() != n)
    throw std::invalid_argument("composite inputs must be non-empty and equally sized");

  RenderSample s;
  s.depths.assign(depths.begin(), depths.end());
  s.occupancies.assign(occupancies.begin(), occupancies.end());
  s.colors.assign(colors.begin(), colors.end());
  s.weights.resize(n);

  double transmittance = 1.0;
  for (size_t i = 0; i < n; ++i) {
    double w = occupancies[i] * transmittance;
    s.weights[i] = w;
    transmittance *= 1.0 - occupancies[i];
    s.color += w * colors[i];
    s.depth += w * depths[i];
    s.mask += w;
  }
  for (size_t i = 0; i < n; ++i) {
    double dd = depths[i] - s.depth;
    s.depth_variance += s.weights[i] * dd * dd;
  }
  return s;
}

void composite_backward(const RenderSample& s, const Vec3& d_color, double d_depth, double d_mask,
                        double d_variance, std::span<double> d_occ, std::span<Vec3> d_col) {
  const size_t n = s.weights.size();
  if (d_occ.size() != n || d_col.size() != n)
    throw std::invalid_argument("composite adjoint size mismatch");

  // V depends on D through the (d_i - D)^2 terms; fold that path into the
  // effective depth adjoint. sum_i w_i (d_i - D) = D (1 - M).
  double weighted_dev = s.depth * (1.0 - s.mask);
  double d_depth_eff = d_depth - 2.0 * d_variance * weighted_dev;

  // a_i = dL/dw_i with the chain through D and V expanded.
  std::vector<double> a(n);
  for (size_t i = 0; i < n; ++i) {
    double dd = s.depths[i] - s.depth;
    a[i] = d_color.dot(s.colors[i]) + d_depth_eff * s.depths[i] + d_mask + d_variance * dd * dd;
    d_col[i] = s.weights[i] * d_color;
  }

  // dL/do_i = P_i (a_i - Q_i) where P_i is the transmittance before i and
  // Q_i = sum_{k>i} a_k o_k prod_{i<j<k} (1-o_j), built back to front.
  double q = 0.0;
  for (size_t i = n; i-- > 0;) {
    double o = s.occupancies[i];
    double p = o > 0 ? s.weights[i] / o : 0.0;
    if (o <= 0) {
      // transmittance before i equals the product up to the previous sample
      p = 1.0;
      for (size_t j = 0; j < i; ++j) p *= 1.0 - s.occupancies[j];
    }
    d_occ[i] = p * (a[i] - q);
    q = a[i] * o + (1.0 - o) * q;
  }
}

}  // namespace objrecon::render
