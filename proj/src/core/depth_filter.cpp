#include "objrecon/core/depth_filter.hpp"

#include <cmath>
#include <vector>

namespace objrecon {

Frame filter_depth_outliers(const Frame& frame, int instance_id, const DepthFilterConfig& cfg) {
  if (!(cfg.alpha > 0)) throw std::invalid_argument("alpha must be positive");
  Frame out = frame;

  std::vector<size_t> masked;
  double sum = 0, sum_sq = 0;
  for (size_t i = 0; i < frame.masks.data.size(); ++i) {
    if (frame.masks.data[i] != instance_id) continue;
    double d = frame.depth.data[i];
    if (d <= 0) continue;
    masked.push_back(i);
    sum += d;
    sum_sq += d * d;
  }
  if (masked.empty()) return out;

  double n = static_cast<double>(masked.size());
  double mean = sum / n;
  double var = std::max(0.0, sum_sq / n - mean * mean);
  double band = cfg.alpha * std::sqrt(var);

  std::vector<size_t> kept;
  kept.reserve(masked.size());
  for (size_t i : masked) {
    double d = frame.depth.data[i];
    if (d < mean - band || d > mean + band) {
      out.depth.data[i] = 0.0f;
    } else {
      kept.push_back(i);
    }
  }
  if (kept.empty()) return out;

  std::vector<size_t> counts(cfg.histogram_bins, 0);
  double bin_width = cfg.range_max_m / cfg.histogram_bins;
  auto bin_of = [&](double d) {
    int b = static_cast<int>(d / bin_width);
    return std::clamp(b, 0, cfg.histogram_bins - 1);
  };
  for (size_t i : kept) counts[bin_of(frame.depth.data[i])]++;

  size_t min_count = static_cast<size_t>(std::ceil(cfg.min_bin_fraction * kept.size()));
  for (size_t i : kept) {
    if (counts[bin_of(frame.depth.data[i])] < min_count) out.depth.data[i] = 0.0f;
  }
  return out;
}

}  // namespace objrecon
