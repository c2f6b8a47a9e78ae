#pragma once

#include <Eigen/Dense>
#include <span>

#include "objrecon/core/types.hpp"
#include "objrecon/render/view.hpp"

namespace objrecon::library {

/// Masked color+depth view of a single object, the unit the retrieval
/// descriptor is computed from.
struct ObjectView {
  ImageF color;  // H x W x 3
  ImageF depth;  // H x W, meters
  ImageF mask;   // H x W, values in [0,1]; >= 0.5 counts as inside
  Intrinsics intrinsics;
};

ObjectView view_from_frame(const Frame& frame, int instance_id);
ObjectView view_from_render(const render::RenderedView& view);

constexpr int kDescriptorSize = 64;  // 3 x 16 RGB bins + 16 normal-angle bins

/// Appearance/shape descriptor: per view, L1-normalized histograms of masked
/// R, G, B values and of surface-normal angles to the viewing ray; views are
/// averaged and the result L2-normalized. Throws when every view is empty.
Eigen::VectorXd compute_view_descriptor(std::span<const ObjectView> views);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace objrecon::library
