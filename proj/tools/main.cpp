#include <CLI11.hpp>
#include <iostream>

#include "objrecon/io/archive.hpp"
#include "objrecon/io/pipeline.hpp"
#include "objrecon/mesh/marching_cubes.hpp"
#include "objrecon/mesh/ply.hpp"

using namespace objrecon;

namespace {

io::RunConfig make_config(const std::string& config_path, std::optional<uint64_t> seed) {
  io::RunConfig config;
  if (!config_path.empty()) config = io::load_config(config_path);
  if (seed) config.seed = *seed;  // CLI overrides the file
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online object-centric RGB-D reconstruction"};
  app.require_subcommand(1);

  std::string scene_path, dataset_dir, config_path, library_dir, out_path, from_kind;
  std::string pred_path, gt_path, frames_dir, model_path;
  std::optional<uint64_t> seed;
  double resolution = 0.005;
  std::vector<double> thresholds;
  bool seen_only = false;

  CLI::App* gen = app.add_subcommand("gen", "Render a synthetic RGB-D dataset");
  gen->add_option("--scene", scene_path, "Scene spec JSON")->required();
  gen->add_option("--out", out_path, "Output dataset directory")->required();
  gen->add_option("--seed", seed, "Random seed");

  CLI::App* fit = app.add_subcommand("fit", "Reconstruct objects from a dataset");
  fit->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  fit->add_option("--config", config_path, "Run config JSON");
  fit->add_option("--library", library_dir, "Object library directory");
  fit->add_option("--out", out_path, "Output directory")->required();
  fit->add_option("--seed", seed, "Random seed (overrides config)");

  CLI::App* libb = app.add_subcommand("library-build", "Build an object library");
  libb->add_option("--from", from_kind, "Source kind: dataset | models")
      ->check(CLI::IsMember({"dataset", "models"}))
      ->required();
  libb->add_option("--dataset", dataset_dir, "Dataset directory (--from dataset)");
  libb->add_option("--models", model_path, "Fit output directory (--from models)");
  libb->add_option("--config", config_path, "Run config JSON");
  libb->add_option("--out", out_path, "Output library directory")->required();
  libb->add_option("--seed", seed, "Random seed");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate meshes against ground truth");
  eval->add_option("--pred", pred_path, "Predicted mesh (.ply) or directory")->required();
  eval->add_option("--gt", gt_path, "Ground-truth mesh (.ply) or directory")->required();
  eval->add_option("--thresholds", thresholds, "Completion-ratio thresholds in meters");
  eval->add_flag("--seen-only", seen_only, "Cull ground truth to parts seen in --frames");
  eval->add_option("--frames", frames_dir, "Dataset directory for culling");
  eval->add_option("--config", config_path, "Run config JSON");

  CLI::App* exp = app.add_subcommand("export", "Extract a mesh from a model archive");
  exp->add_option("--model", model_path, "Model archive")->required();
  exp->add_option("--resolution", resolution, "Marching-cubes spacing in meters");
  exp->add_option("--out", out_path, "Output .ply path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    int threads = io::worker_count_from_env();
    if (gen->parsed()) {
      io::SceneSpec spec = io::load_scene_spec(scene_path);
      io::generate_dataset(spec, out_path, seed.value_or(0));
      std::cout << "dataset written to " << out_path << "\n";
    } else if (fit->parsed()) {
      io::RunConfig config = make_config(config_path, seed);
      io::FitResult result = io::fit_dataset(dataset_dir, config, library_dir, out_path, threads);
      std::cout << "fit " << result.object_ids.size() << " object(s) into " << result.out_dir
                << "\n";
    } else if (libb->parsed()) {
      io::RunConfig config = make_config(config_path, seed);
      std::string fit_dir = model_path;
      if (from_kind == "dataset") {
        if (dataset_dir.empty()) throw std::runtime_error("--from dataset needs --dataset");
        fit_dir = out_path + ".fit";
        io::fit_dataset(dataset_dir, config, "", fit_dir, threads);
      } else if (fit_dir.empty()) {
        throw std::runtime_error("--from models needs --models <fit output dir>");
      }
      io::build_library_from_fit(fit_dir, out_path, config);
      std::cout << "library written to " << out_path << "\n";
    } else if (eval->parsed()) {
      io::RunConfig config = make_config(config_path, std::nullopt);
      if (thresholds.empty()) thresholds = config.eval_thresholds_m;
      auto records = io::evaluate_meshes(pred_path, gt_path, thresholds, seen_only, frames_dir,
                                         config.cull_tau_m);
      std::cout << io::format_eval_records(records);
    } else if (exp->parsed()) {
      field::ObjectModel model = io::load_model(model_path);
      mesh::TriangleMesh m = mesh::extract_mesh(model, resolution, true);
      mesh::write_ply(m, out_path);
      std::cout << "mesh with " << m.vertices.size() << " vertices written to " << out_path
                << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
