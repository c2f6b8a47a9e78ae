#include "objrecon/render/view.hpp"

#include "objrecon/render/sampling.hpp"

namespace objrecon::render {

RenderSample render_ray(const field::ObjectModel& model, const Vec3& origin, const Vec3& dir,
                        int n_samples, field::FieldEvaluator& eval) {
  double t0, t1;
  if (!ray_box_span(origin, dir, model.box, t0, t1)) return {};
  std::vector<double> depths = stratified_midpoints(t0, t1, n_samples);
  std::vector<Vec3> coords(depths.size());
  for (size_t i = 0; i < depths.size(); ++i)
    coords[i] = model.box.to_box(origin + depths[i] * dir);
  eval.evaluate(model, coords, true);
  return composite(eval.occupancy(), eval.color(), depths);
}

RenderedView render_view(const field::ObjectModel& model, const Pose& pose,
                         const Intrinsics& intrinsics, int n_samples) {
  RenderedView view;
  view.pose = pose;
  view.intrinsics = intrinsics;
  view.color = ImageF(intrinsics.width, intrinsics.height, 3, 0.0f);
  view.depth = ImageF(intrinsics.width, intrinsics.height, 1, 0.0f);
  view.mask = ImageF(intrinsics.width, intrinsics.height, 1, 0.0f);

  field::FieldEvaluator eval;
  const Vec3 origin = pose.translation;
  for (int y = 0; y < intrinsics.height; ++y) {
    for (int x = 0; x < intrinsics.width; ++x) {
      Vec3 dir_cam((x - intrinsics.cx) / intrinsics.fx, (y - intrinsics.cy) / intrinsics.fy, 1.0);
      Vec3 dir = pose.rotation * dir_cam;
      RenderSample s = render_ray(model, origin, dir, n_samples, eval);
      if (s.weights.empty()) continue;
      view.mask.at(x, y) = static_cast<float>(s.mask);
      for (int c = 0; c < 3; ++c) view.color.at(x, y, c) = static_cast<float>(s.color[c]);
      if (s.mask >= 0.5) view.depth.at(x, y) = static_cast<float>(s.depth / s.mask);
    }
  }
  return view;
}

}  // namespace objrecon::render
