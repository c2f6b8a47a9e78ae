#include "objrecon/render/train.hpp"

namespace objrecon::render {

TrainStats train_step(field::ObjectModel& model, std::span<const RayTarget> rays,
                      const RaySampleConfig& scfg, const LossWeights& weights,
                      const AdamWConfig& ocfg, TrainWorkspace& ws, std::mt19937_64& rng) {
  TrainStats stats;
  stats.rays = static_cast<int>(rays.size());
  if (rays.empty()) return stats;

  if (ws.grads.tensors.empty() || !ws.grads.matches(model))
    ws.grads = field::GradientBuffer::like(model);
  ws.grads.zero();

  const double inv_batch = 1.0 / static_cast<double>(rays.size());
  const bool all_frozen = model.frozen_geo() && model.frozen_col();

  for (const RayTarget& ray : rays) {
    double t_near, t_far;
    if (!ray_box_span(ray.origin, ray.dir, model.box, t_near, t_far)) continue;
    stats.rays_hit++;

    std::vector<double> depths;
    if (ray.mask > 0.5 && ray.depth > 0)
      depths = sample_ray_depths(ray.depth, t_near, scfg, rng);
    else
      depths = sample_uniform_depths(t_near, t_far, scfg.n_total, rng);

    const size_t n = depths.size();
    ws.coords.resize(n);
    for (size_t i = 0; i < n; ++i)
      ws.coords[i] = model.box.to_box(ray.origin + depths[i] * ray.dir);

    ws.eval.evaluate(model, ws.coords, true);
    RenderSample sample = composite(ws.eval.occupancy(), ws.eval.color(), depths);

    LossAdjoints adj;
    LossTerms terms = compute_losses(sample, ray.color, ray.depth, ray.mask, weights, &adj);
    stats.loss_color += terms.color;
    stats.loss_depth += terms.depth;
    stats.loss_mask += terms.mask;
    stats.loss_total += terms.total;

    if (all_frozen) continue;
    ws.d_occ.assign(n, 0.0);
    ws.d_col.assign(n, Vec3::Zero());
    composite_backward(sample, adj.d_color * inv_batch, adj.d_depth * inv_batch,
                       adj.d_mask * inv_batch, adj.d_variance * inv_batch, ws.d_occ, ws.d_col);
    ws.eval.backward(model, ws.d_occ, ws.d_col, ws.grads);
  }

  stats.loss_color *= inv_batch;
  stats.loss_depth *= inv_batch;
  stats.loss_mask *= inv_batch;
  stats.loss_total *= inv_batch;

  if (!all_frozen) adamw_step(model, ws.grads, ocfg);
  return stats;
}

}  // namespace objrecon::render
