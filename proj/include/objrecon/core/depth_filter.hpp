#pragma once

#include "objrecon/core/types.hpp"

namespace objrecon {

struct DepthFilterConfig {
  double alpha = 1.5;          // band half-width in standard deviations
  int histogram_bins = 15;     // over [0, range_max_m]
  double min_bin_fraction = 0.05;
  double range_max_m = 6.0;
};

/// Zeroes masked depth readings of `instance_id` that fall outside the
/// mean +/- alpha*std band, then drops readings in sparsely populated bins of
/// a depth histogram over the camera range. Other pixels are untouched.
Frame filter_depth_outliers(const Frame& frame, int instance_id,
                            const DepthFilterConfig& cfg = {});

}  // namespace objrecon
