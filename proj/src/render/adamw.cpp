#include "objrecon/render/adamw.hpp"

#include <cmath>
#include <stdexcept>

namespace objrecon::render {

void adamw_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                  std::span<double> v, long& step, double lr, const AdamWConfig& cfg) {
  const size_t n = params.size();
  if (grads.size() != n || m.size() != n || v.size() != n)
    throw std::invalid_argument("adamw tensor shape mismatch");
  step += 1;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  double decay = 1.0 - lr * cfg.weight_decay;
  for (size_t i = 0; i < n; ++i) {
    double g = grads[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    double m_hat = m[i] / bc1;
    double v_hat = v[i] / bc2;
    params[i] = params[i] * decay - lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void adamw_step(field::ObjectModel& model, const field::GradientBuffer& grads,
                const AdamWConfig& cfg) {
  auto ptrs = field::tensor_ptrs(model);
  auto infos = field::tensor_infos(model);
  if (grads.tensors.size() != ptrs.size())
    throw std::invalid_argument("gradient buffer does not match model");
  auto all_zero = [](const std::vector<double>& v) {
    for (double x : v)
      if (x != 0.0) return false;
    return true;
  };
  for (size_t t = 0; t < ptrs.size(); ++t) {
    const auto& info = infos[t];
    bool frozen = info.is_geo ? (info.is_grid ? model.frozen_geo_grid : model.frozen_geo_mlp)
                              : (info.is_grid ? model.frozen_col_grid : model.frozen_col_mlp);
    if (frozen) continue;
    // a tensor that has never received any gradient is not being trained;
    // stepping it would only bleed weight decay into the untouched side
    if (model.opt.steps[t] == 0 && all_zero(grads.tensors[t])) continue;
    adamw_update(*ptrs[t], grads.tensors[t], model.opt.m[t], model.opt.v[t], model.opt.steps[t],
                 info.is_grid ? cfg.lr_grid : cfg.lr_mlp, cfg);
  }
}

}  // namespace objrecon::render
