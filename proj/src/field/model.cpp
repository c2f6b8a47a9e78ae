#include "objrecon/field/model.hpp"

#include <cstring>

namespace objrecon::field {

namespace {

template <typename Model, typename Ptr>
std::vector<Ptr> collect_tensor_ptrs(Model& model) {
  std::vector<Ptr> out;
  for (auto& level : model.geo_grid.levels) out.push_back(&level);
  for (size_t l = 0; l < model.geo_mlp.weights.size(); ++l) {
    out.push_back(&model.geo_mlp.weights[l]);
    out.push_back(&model.geo_mlp.biases[l]);
  }
  for (auto& level : model.col_grid.levels) out.push_back(&level);
  for (size_t l = 0; l < model.col_mlp.weights.size(); ++l) {
    out.push_back(&model.col_mlp.weights[l]);
    out.push_back(&model.col_mlp.biases[l]);
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>*> tensor_ptrs(ObjectModel& model) {
  return collect_tensor_ptrs<ObjectModel, std::vector<double>*>(model);
}

std::vector<const std::vector<double>*> tensor_ptrs(const ObjectModel& model) {
  return collect_tensor_ptrs<const ObjectModel, const std::vector<double>*>(model);
}

std::vector<TensorInfo> tensor_infos(const ObjectModel& model) {
  std::vector<TensorInfo> out;
  auto add_side = [&](const FeatureGrid& grid, const TinyMlp& mlp, bool is_geo,
                      const std::string& prefix) {
    for (size_t l = 0; l < grid.levels.size(); ++l)
      out.push_back({prefix + "_grid.l" + std::to_string(l), true, is_geo});
    for (size_t l = 0; l < mlp.weights.size(); ++l) {
      out.push_back({prefix + "_mlp.w" + std::to_string(l), false, is_geo});
      out.push_back({prefix + "_mlp.b" + std::to_string(l), false, is_geo});
    }
  };
  add_side(model.geo_grid, model.geo_mlp, true, "geo");
  add_side(model.col_grid, model.col_mlp, false, "col");
  return out;
}

GradientBuffer GradientBuffer::like(const ObjectModel& model) {
  GradientBuffer buf;
  for (const auto* t : tensor_ptrs(model)) buf.tensors.emplace_back(t->size(), 0.0);
  return buf;
}

void GradientBuffer::zero() {
  for (auto& t : tensors) std::fill(t.begin(), t.end(), 0.0);
}

bool GradientBuffer::matches(const ObjectModel& model) const {
  auto ptrs = tensor_ptrs(model);
  if (ptrs.size() != tensors.size()) return false;
  for (size_t i = 0; i < ptrs.size(); ++i)
    if (ptrs[i]->size() != tensors[i].size()) return false;
  return true;
}

AdamMoments AdamMoments::like(const ObjectModel& model) {
  AdamMoments opt;
  for (const auto* t : tensor_ptrs(model)) {
    opt.m.emplace_back(t->size(), 0.0);
    opt.v.emplace_back(t->size(), 0.0);
  }
  opt.steps.assign(opt.m.size(), 0);
  return opt;
}

void AdamMoments::reset_grids(const ObjectModel& model) {
  auto infos = tensor_infos(model);
  auto ptrs = tensor_ptrs(model);
  for (size_t i = 0; i < infos.size(); ++i) {
    if (!infos[i].is_grid) continue;
    m[i].assign(ptrs[i]->size(), 0.0);
    v[i].assign(ptrs[i]->size(), 0.0);
    steps[i] = 0;
  }
}

ObjectModel ObjectModel::create(const GridConfig& cfg, const BoxTransform& box,
                                std::mt19937_64& rng) {
  ObjectModel model;
  model.geo_grid = FeatureGrid::create(cfg, rng);
  model.col_grid = FeatureGrid::create(cfg, rng);
  model.geo_mlp = TinyMlp::create({cfg.levels, 64, 1}, rng);
  model.col_mlp = TinyMlp::create({cfg.levels, 64, 64, 3}, rng);
  model.box = box;
  model.opt = AdamMoments::like(model);
  return model;
}

double ObjectModel::decode_occupancy(const Vec3& box_coord) const {
  std::vector<double> embed(geo_grid.config.levels);
  geo_grid.encode(box_coord, embed.data());
  std::vector<double> scratch(2 * geo_mlp.max_width());
  double logit = 0;
  geo_mlp.forward(embed.data(), &logit, scratch.data());
  return logistic(logit);
}

Vec3 ObjectModel::decode_color(const Vec3& box_coord) const {
  std::vector<double> embed(col_grid.config.levels);
  col_grid.encode(box_coord, embed.data());
  std::vector<double> scratch(2 * col_mlp.max_width());
  double logits[3];
  col_mlp.forward(embed.data(), logits, scratch.data());
  return Vec3(logistic(logits[0]), logistic(logits[1]), logistic(logits[2]));
}

void FieldEvaluator::evaluate(const ObjectModel& model, std::span<const Vec3> box_coords,
                              bool with_color) {
  n_ = box_coords.size();
  with_color_ = with_color;
  const int L = model.geo_grid.config.levels;
  const int geo_w = model.geo_mlp.max_width();
  const int col_w = model.col_mlp.max_width();
  const size_t geo_cache_stride = static_cast<size_t>(model.geo_mlp.layer_count()) * geo_w;
  const size_t col_cache_stride = static_cast<size_t>(model.col_mlp.layer_count()) * col_w;

  geo_fp_.resize(n_ * L);
  geo_cache_.resize(n_ * geo_cache_stride);
  occ_.resize(n_);
  geo_logit_.resize(n_);
  scratch_.resize(2 * static_cast<size_t>(std::max(geo_w, col_w)));
  if (with_color) {
    col_fp_.resize(n_ * L);
    col_cache_.resize(n_ * col_cache_stride);
    rgb_.resize(n_);
  }

  std::vector<double> embed(L);
  for (size_t s = 0; s < n_; ++s) {
    const Vec3& q = box_coords[s];
    for (int l = 0; l < L; ++l) {
      CellFootprint fp = model.geo_grid.footprint(l, q);
      geo_fp_[s * L + l] = fp;
      const auto& table = model.geo_grid.levels[l];
      double v = 0;
      for (int c = 0; c < 8; ++c) v += fp.weight[c] * table[fp.corner[c]];
      embed[l] = v;
    }
    double logit;
    model.geo_mlp.forward(embed.data(), &logit, scratch_.data(),
                          geo_cache_.data() + s * geo_cache_stride);
    geo_logit_[s] = logit;
    occ_[s] = logistic(logit);

    if (!with_color) continue;
    for (int l = 0; l < L; ++l) {
      CellFootprint fp = model.col_grid.footprint(l, q);
      col_fp_[s * L + l] = fp;
      const auto& table = model.col_grid.levels[l];
      double v = 0;
      for (int c = 0; c < 8; ++c) v += fp.weight[c] * table[fp.corner[c]];
      embed[l] = v;
    }
    double logits[3];
    model.col_mlp.forward(embed.data(), logits, scratch_.data(),
                          col_cache_.data() + s * col_cache_stride);
    rgb_[s] = Vec3(logistic(logits[0]), logistic(logits[1]), logistic(logits[2]));
  }
}

void FieldEvaluator::backward(const ObjectModel& model, std::span<const double> d_occ,
                              std::span<const Vec3> d_rgb, GradientBuffer& buf) {
  if (!buf.matches(model)) throw std::invalid_argument("gradient buffer shape mismatch");
  if (d_occ.size() != n_ || (with_color_ && !d_rgb.empty() && d_rgb.size() != n_))
    throw std::invalid_argument("adjoint batch size mismatch");

  const int L = model.geo_grid.config.levels;
  const int geo_w = model.geo_mlp.max_width();
  const int col_w = model.col_mlp.max_width();
  const size_t geo_cache_stride = static_cast<size_t>(model.geo_mlp.layer_count()) * geo_w;
  const size_t col_cache_stride = static_cast<size_t>(model.col_mlp.layer_count()) * col_w;
  const int geo_mlp_tensors = 2 * model.geo_mlp.layer_count();
  const int col_grid_base = L + geo_mlp_tensors;

  // Views into the flat buffer, arranged per canonical tensor order.
  std::vector<std::vector<double>> *geo_gw = nullptr, *geo_gb = nullptr;
  std::vector<std::vector<double>> geo_w_grads, geo_b_grads, col_w_grads, col_b_grads;
  // Work on per-mlp copies of the slices to keep TinyMlp::backward simple.
  auto split_mlp_grads = [&](int base, const TinyMlp& mlp, std::vector<std::vector<double>>& gw,
                             std::vector<std::vector<double>>& gb) {
    gw.clear();
    gb.clear();
    for (int l = 0; l < mlp.layer_count(); ++l) {
      gw.push_back(std::move(buf.tensors[base + 2 * l]));
      gb.push_back(std::move(buf.tensors[base + 2 * l + 1]));
    }
  };
  auto restore_mlp_grads = [&](int base, std::vector<std::vector<double>>& gw,
                               std::vector<std::vector<double>>& gb) {
    for (size_t l = 0; l < gw.size(); ++l) {
      buf.tensors[base + 2 * l] = std::move(gw[l]);
      buf.tensors[base + 2 * l + 1] = std::move(gb[l]);
    }
  };
  split_mlp_grads(L, model.geo_mlp, geo_w_grads, geo_b_grads);
  if (with_color_) split_mlp_grads(col_grid_base + L, model.col_mlp, col_w_grads, col_b_grads);
  geo_gw = model.frozen_geo_mlp ? nullptr : &geo_w_grads;
  geo_gb = model.frozen_geo_mlp ? nullptr : &geo_b_grads;

  scratch_.resize(2 * static_cast<size_t>(std::max(geo_w, col_w)));
  std::vector<double> d_embed(L);
  for (size_t s = 0; s < n_; ++s) {
    double go = d_occ[s];
    if (go != 0.0) {
      double o = occ_[s];
      double d_logit = go * o * (1.0 - o);
      bool need_grid = !model.frozen_geo_grid;
      if (d_logit != 0.0 && (need_grid || geo_gw)) {
        model.geo_mlp.backward(&d_logit, geo_cache_.data() + s * geo_cache_stride, geo_gw, geo_gb,
                               need_grid ? d_embed.data() : nullptr, scratch_.data());
        if (need_grid) {
          for (int l = 0; l < L; ++l) {
            const CellFootprint& fp = geo_fp_[s * L + l];
            auto& g = buf.tensors[l];
            double dl = d_embed[l];
            for (int c = 0; c < 8; ++c) g[fp.corner[c]] += dl * fp.weight[c];
          }
        }
      }
    }

    if (!with_color_ || d_rgb.empty()) continue;
    const Vec3& gc = d_rgb[s];
    if (gc.isZero()) continue;
    const Vec3& rgb = rgb_[s];
    double d_logits[3];
    for (int k = 0; k < 3; ++k) d_logits[k] = gc[k] * rgb[k] * (1.0 - rgb[k]);
    bool need_grid = !model.frozen_col_grid;
    bool need_mlp = !model.frozen_col_mlp;
    if (!need_grid && !need_mlp) continue;
    model.col_mlp.backward(d_logits, col_cache_.data() + s * col_cache_stride,
                           need_mlp ? &col_w_grads : nullptr, need_mlp ? &col_b_grads : nullptr,
                           need_grid ? d_embed.data() : nullptr, scratch_.data());
    if (need_grid) {
      for (int l = 0; l < L; ++l) {
        const CellFootprint& fp = col_fp_[s * L + l];
        auto& g = buf.tensors[col_grid_base + l];
        double dl = d_embed[l];
        for (int c = 0; c < 8; ++c) g[fp.corner[c]] += dl * fp.weight[c];
      }
    }
  }

  restore_mlp_grads(L, geo_w_grads, geo_b_grads);
  if (with_color_) restore_mlp_grads(col_grid_base + L, col_w_grads, col_b_grads);
}

void evaluate_with_gradients(const ObjectModel& model, std::span<const Vec3> box_coords,
                             std::span<const double> d_occ, std::span<const Vec3> d_rgb,
                             GradientBuffer& buf, FieldEvaluator& eval) {
  eval.evaluate(model, box_coords, !d_rgb.empty());
  eval.backward(model, d_occ, d_rgb, buf);
}

}  // namespace objrecon::field
