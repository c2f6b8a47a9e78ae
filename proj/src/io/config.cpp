#include "objrecon/io/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>

namespace objrecon::io {

using nlohmann::json;

namespace {

// Pulls a field out of `j` and records the key as seen; type errors name the key.
template <typename T>
void take(const json& j, std::set<std::string>& seen, const std::string& key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  seen.insert(key);
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw std::runtime_error("config key '" + key + "' has the wrong type");
  }
}

void reject_unknown(const json& j, const std::set<std::string>& seen, const std::string& scope) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!seen.count(it.key()))
      throw std::runtime_error("unknown config key '" +
                               (scope.empty() ? it.key() : scope + "." + it.key()) + "'");
  }
}

json section(const json& j, std::set<std::string>& seen, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) return json::object();
  if (!it->is_object()) throw std::runtime_error("config section '" + key + "' must be an object");
  seen.insert(key);
  return *it;
}

}  // namespace

void RunConfig::validate() const {
  mapper.grid.validate();
  mapper.rays.validate();
  mapper.losses.validate();
  if (mapper.total_rays < 1 || mapper.keyframes_per_step < 1 || mapper.keyframe_every < 1 ||
      mapper.keyframe_buffer < 1 || mapper.min_mask_pixels < 1 || mapper.steps_per_frame < 0 ||
      mapper.box_margin < 0 || mapper.coarse_voxel_m <= 0 || mapper.min_extent_m <= 0 ||
      mapper.extension_hysteresis < 1 || mapper.min_rays_per_object < 1)
    throw std::runtime_error("invalid mapper configuration");
  if (library.top_m < 1 || library.voxel_m <= 0 || library.normals_k < 3)
    throw std::runtime_error("invalid library configuration");
  if (mesh_resolution_m <= 0 || cull_tau_m < 0)
    throw std::runtime_error("invalid mesh configuration");
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config root must be a JSON object");

  RunConfig cfg;
  std::set<std::string> seen;

  take(j, seen, "seed", cfg.seed);

  {
    json g = section(j, seen, "grid");
    std::set<std::string> s;
    take(g, s, "levels", cfg.mapper.grid.levels);
    take(g, s, "n0", cfg.mapper.grid.n0);
    take(g, s, "gamma", cfg.mapper.grid.gamma);
    reject_unknown(g, s, "grid");
  }
  {
    json r = section(j, seen, "rays");
    std::set<std::string> s;
    take(r, s, "total", cfg.mapper.total_rays);
    take(r, s, "keyframes", cfg.mapper.keyframes_per_step);
    take(r, s, "per_ray", cfg.mapper.rays.n_total);
    take(r, s, "surface", cfg.mapper.rays.n_surface);
    take(r, s, "synth_per_ray", cfg.mapper.rays.n_synth);
    take(r, s, "sigma_m", cfg.mapper.rays.sigma);
    reject_unknown(r, s, "rays");
  }
  {
    json l = section(j, seen, "losses");
    std::set<std::string> s;
    take(l, s, "lambda_color", cfg.mapper.losses.lambda_color);
    take(l, s, "lambda_mask", cfg.mapper.losses.lambda_mask);
    take(l, s, "variance_floor", cfg.mapper.losses.variance_floor);
    reject_unknown(l, s, "losses");
  }
  {
    json o = section(j, seen, "optim");
    std::set<std::string> s;
    take(o, s, "lr_grid", cfg.mapper.optim.lr_grid);
    take(o, s, "lr_mlp", cfg.mapper.optim.lr_mlp);
    take(o, s, "weight_decay", cfg.mapper.optim.weight_decay);
    take(o, s, "beta1", cfg.mapper.optim.beta1);
    take(o, s, "beta2", cfg.mapper.optim.beta2);
    take(o, s, "eps", cfg.mapper.optim.eps);
    reject_unknown(o, s, "optim");
  }
  {
    json m = section(j, seen, "objmap");
    std::set<std::string> s;
    take(m, s, "keyframe_every", cfg.mapper.keyframe_every);
    take(m, s, "buffer", cfg.mapper.keyframe_buffer);
    take(m, s, "min_mask_pixels", cfg.mapper.min_mask_pixels);
    take(m, s, "box_margin", cfg.mapper.box_margin);
    take(m, s, "steps_per_frame", cfg.mapper.steps_per_frame);
    take(m, s, "coarse_voxel_m", cfg.mapper.coarse_voxel_m);
    take(m, s, "min_extent_m", cfg.mapper.min_extent_m);
    take(m, s, "extension_hysteresis", cfg.mapper.extension_hysteresis);
    take(m, s, "min_rays_per_object", cfg.mapper.min_rays_per_object);
    take(m, s, "rect_margin_px", cfg.mapper.rect_margin_px);
    std::string update;
    take(m, s, "grid_update", update);
    if (!update.empty()) {
      if (update == "interpolate") cfg.mapper.grid_update = objmap::GridUpdateMode::interpolate;
      else if (update == "reinitialize")
        cfg.mapper.grid_update = objmap::GridUpdateMode::reinitialize;
      else throw std::runtime_error("objmap.grid_update must be interpolate or reinitialize");
    }
    reject_unknown(m, s, "objmap");
  }
  {
    json l = section(j, seen, "library");
    std::set<std::string> s;
    take(l, s, "m", cfg.library.top_m);
    take(l, s, "sim_threshold", cfg.library.similarity_threshold);
    take(l, s, "fitness_threshold", cfg.library.fitness_threshold);
    take(l, s, "reproj_in_mask", cfg.library.reproj_in_mask);
    take(l, s, "depth_tolerance_m", cfg.library.depth_tolerance_m);
    take(l, s, "voxel_m", cfg.library.voxel_m);
    take(l, s, "fpfh_radius_factor", cfg.library.fpfh_radius_factor);
    take(l, s, "inlier_factor", cfg.library.inlier_factor);
    take(l, s, "normals_k", cfg.library.normals_k);
    take(l, s, "freeze_grids", cfg.library.freeze_grids);
    take(l, s, "synthesize", cfg.library.synthesize);
    reject_unknown(l, s, "library");
  }
  {
    json d = section(j, seen, "depth_filter");
    std::set<std::string> s;
    take(d, s, "enabled", cfg.mapper.depth_filter_enabled);
    take(d, s, "alpha", cfg.mapper.depth_filter.alpha);
    take(d, s, "bins", cfg.mapper.depth_filter.histogram_bins);
    take(d, s, "min_bin_fraction", cfg.mapper.depth_filter.min_bin_fraction);
    take(d, s, "range_max_m", cfg.mapper.depth_filter.range_max_m);
    reject_unknown(d, s, "depth_filter");
  }
  {
    json m = section(j, seen, "mesh");
    std::set<std::string> s;
    take(m, s, "resolution_m", cfg.mesh_resolution_m);
    take(m, s, "cull_tau_m", cfg.cull_tau_m);
    take(m, s, "eval_thresholds_m", cfg.eval_thresholds_m);
    reject_unknown(m, s, "mesh");
  }

  reject_unknown(j, seen, "");
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["grid"] = {{"levels", cfg.mapper.grid.levels},
               {"n0", cfg.mapper.grid.n0},
               {"gamma", cfg.mapper.grid.gamma}};
  j["rays"] = {{"total", cfg.mapper.total_rays},
               {"keyframes", cfg.mapper.keyframes_per_step},
               {"per_ray", cfg.mapper.rays.n_total},
               {"surface", cfg.mapper.rays.n_surface},
               {"synth_per_ray", cfg.mapper.rays.n_synth},
               {"sigma_m", cfg.mapper.rays.sigma}};
  j["losses"] = {{"lambda_color", cfg.mapper.losses.lambda_color},
                 {"lambda_mask", cfg.mapper.losses.lambda_mask},
                 {"variance_floor", cfg.mapper.losses.variance_floor}};
  j["optim"] = {{"lr_grid", cfg.mapper.optim.lr_grid},
                {"lr_mlp", cfg.mapper.optim.lr_mlp},
                {"weight_decay", cfg.mapper.optim.weight_decay},
                {"beta1", cfg.mapper.optim.beta1},
                {"beta2", cfg.mapper.optim.beta2},
                {"eps", cfg.mapper.optim.eps}};
  j["objmap"] = {{"keyframe_every", cfg.mapper.keyframe_every},
                 {"buffer", cfg.mapper.keyframe_buffer},
                 {"min_mask_pixels", cfg.mapper.min_mask_pixels},
                 {"box_margin", cfg.mapper.box_margin},
                 {"steps_per_frame", cfg.mapper.steps_per_frame},
                 {"coarse_voxel_m", cfg.mapper.coarse_voxel_m},
                 {"min_extent_m", cfg.mapper.min_extent_m},
                 {"extension_hysteresis", cfg.mapper.extension_hysteresis},
                 {"min_rays_per_object", cfg.mapper.min_rays_per_object},
                 {"rect_margin_px", cfg.mapper.rect_margin_px},
                 {"grid_update", cfg.mapper.grid_update == objmap::GridUpdateMode::interpolate
                                     ? "interpolate"
                                     : "reinitialize"}};
  j["library"] = {{"m", cfg.library.top_m},
                  {"sim_threshold", cfg.library.similarity_threshold},
                  {"fitness_threshold", cfg.library.fitness_threshold},
                  {"reproj_in_mask", cfg.library.reproj_in_mask},
                  {"depth_tolerance_m", cfg.library.depth_tolerance_m},
                  {"voxel_m", cfg.library.voxel_m},
                  {"fpfh_radius_factor", cfg.library.fpfh_radius_factor},
                  {"inlier_factor", cfg.library.inlier_factor},
                  {"normals_k", cfg.library.normals_k},
                  {"freeze_grids", cfg.library.freeze_grids},
                  {"synthesize", cfg.library.synthesize}};
  j["depth_filter"] = {{"enabled", cfg.mapper.depth_filter_enabled},
                       {"alpha", cfg.mapper.depth_filter.alpha},
                       {"bins", cfg.mapper.depth_filter.histogram_bins},
                       {"min_bin_fraction", cfg.mapper.depth_filter.min_bin_fraction},
                       {"range_max_m", cfg.mapper.depth_filter.range_max_m}};
  j["mesh"] = {{"resolution_m", cfg.mesh_resolution_m},
               {"cull_tau_m", cfg.cull_tau_m},
               {"eval_thresholds_m", cfg.eval_thresholds_m}};
  return j.dump(2);
}

}  // namespace objrecon::io
