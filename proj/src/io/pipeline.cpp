#include "objrecon/io/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "objrecon/io/archive.hpp"
#include "objrecon/io/dataset.hpp"
#include "objrecon/library/library.hpp"
#include "objrecon/mesh/culling.hpp"
#include "objrecon/mesh/marching_cubes.hpp"
#include "objrecon/mesh/ply.hpp"
#include "objrecon/synth/raycast.hpp"

namespace objrecon::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Vec3 vec3_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 3)
    throw std::runtime_error("scene key '" + key + "' must be a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

SceneSpec parse_scene_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("scene spec is not valid JSON: ") + e.what());
  }
  SceneSpec spec;

  const json& intr = j.at("intrinsics");
  spec.intrinsics.fx = intr.at("fx").get<double>();
  spec.intrinsics.fy = intr.at("fy").get<double>();
  spec.intrinsics.cx = intr.at("cx").get<double>();
  spec.intrinsics.cy = intr.at("cy").get<double>();
  spec.intrinsics.width = intr.at("width").get<int>();
  spec.intrinsics.height = intr.at("height").get<int>();
  spec.intrinsics.depth_scale = intr.value("depth_scale", 5000.0);
  spec.intrinsics.validate();

  for (const json& p : j.at("primitives")) {
    synth::Primitive prim;
    prim.kind = synth::primitive_kind_from_string(p.at("kind").get<std::string>());
    prim.pose.translation = vec3_from_json(p.at("center"), "center");
    if (p.contains("rotation_axis_angle")) {
      Vec3 aa = vec3_from_json(p.at("rotation_axis_angle"), "rotation_axis_angle");
      double angle = aa.norm();
      prim.pose.rotation = angle < 1e-12
                               ? Mat3::Identity()
                               : Eigen::AngleAxisd(angle, aa / angle).toRotationMatrix();
    }
    if (p.contains("radius")) {
      prim.size.x() = prim.size.y() = p.at("radius").get<double>();
      prim.size.z() = p.value("height", 2.0 * prim.size.x());
    }
    if (p.contains("size")) prim.size = vec3_from_json(p.at("size"), "size");
    prim.albedo = vec3_from_json(p.at("albedo"), "albedo");
    prim.instance_id = p.at("instance").get<int>();
    prim.category_id = p.value("category", 0);
    prim.validate();
    spec.primitives.push_back(prim);
  }

  const json& t = j.at("trajectory");
  std::string kind = t.at("kind").get<std::string>();
  if (kind == "orbit") spec.trajectory.kind = synth::TrajectoryKind::orbit;
  else if (kind == "hemisphere") spec.trajectory.kind = synth::TrajectoryKind::hemisphere;
  else if (kind == "linear") spec.trajectory.kind = synth::TrajectoryKind::linear;
  else throw std::runtime_error("unknown trajectory kind: " + kind);
  spec.trajectory.frames = t.at("frames").get<int>();
  if (t.contains("center")) spec.trajectory.center = vec3_from_json(t.at("center"), "center");
  if (t.contains("look_at")) spec.trajectory.look_at = vec3_from_json(t.at("look_at"), "look_at");
  spec.trajectory.radius = t.value("radius", 0.5);
  spec.trajectory.azimuth_start_deg = t.value("azimuth_start_deg", 0.0);
  spec.trajectory.azimuth_end_deg = t.value("azimuth_end_deg", 360.0);
  spec.trajectory.elevation_deg = t.value("elevation_deg", 0.0);
  spec.trajectory.elevation_max_deg = t.value("elevation_max_deg", 0.0);
  spec.trajectory.cycles = t.value("cycles", 1.0);
  if (t.contains("start")) spec.trajectory.start = vec3_from_json(t.at("start"), "start");
  if (t.contains("end")) spec.trajectory.end = vec3_from_json(t.at("end"), "end");
  spec.trajectory.validate();

  spec.depth_noise_sigma = j.value("depth_noise_sigma", 0.0);
  return spec;
}

SceneSpec load_scene_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene spec: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_scene_spec(text);
}

void generate_dataset(const SceneSpec& spec, const std::string& out_dir, uint64_t seed) {
  std::vector<Pose> poses = synth::generate_trajectory(spec.trajectory);
  std::mt19937_64 rng(seed);
  synth::RenderOptions opts;
  opts.depth_noise_sigma = spec.depth_noise_sigma;

  std::vector<long> indices;
  std::map<int, int> categories;
  for (const auto& prim : spec.primitives) categories[prim.instance_id] = prim.category_id;
  for (size_t i = 0; i < poses.size(); ++i) {
    Frame frame = synth::raycast_frame(spec.primitives, poses[i], spec.intrinsics,
                                       static_cast<long>(i), opts, &rng);
    write_frame(out_dir, frame);
    indices.push_back(static_cast<long>(i));
  }
  write_intrinsics(out_dir, spec.intrinsics);
  write_poses(out_dir, indices, poses);
  write_categories(out_dir, categories);
}

FitResult fit_dataset(const std::string& dataset_dir, const RunConfig& config,
                      const std::string& library_dir, const std::string& out_dir, int threads) {
  Dataset dataset(dataset_dir);
  library::ObjectLibrary lib;
  if (!library_dir.empty()) lib = library::load_library(library_dir);

  objmap::SceneState scene;
  scene.config = config.mapper;
  scene.seed = config.seed;

  size_t cursor = 0;
  auto next_frame = [&]() -> std::shared_ptr<const Frame> {
    if (cursor >= dataset.size()) return nullptr;
    try {
      return std::make_shared<Frame>(dataset.load(cursor++));
    } catch (const std::exception& e) {
      throw std::runtime_error("failed loading frame " +
                               std::to_string(dataset.frame_index(cursor - 1)) + ": " + e.what());
    }
  };
  objmap::run_sequence(scene, next_frame, lib.empty() ? nullptr : &lib, config.library, threads);

  fs::create_directories(fs::path(out_dir) / "models");
  fs::create_directories(fs::path(out_dir) / "meshes");
  write_intrinsics((fs::path(out_dir) / "models").string(), dataset.intrinsics());

  std::ofstream events(fs::path(out_dir) / "events.jsonl");
  for (const objmap::Event& ev : scene.events) events << objmap::to_json_line(ev) << "\n";
  if (!events) throw std::runtime_error("cannot write events.jsonl");

  FitResult result;
  result.out_dir = out_dir;
  for (auto& [id, obj] : scene.objects) {
    result.object_ids.push_back(id);
    char stem[64];
    std::snprintf(stem, sizeof(stem), "object_%03d", id);

    save_model(obj.model, (fs::path(out_dir) / "models" / (std::string(stem) + ".model")).string());

    std::vector<long> kf_indices;
    std::vector<Pose> kf_poses;
    for (const objmap::Keyframe& kf : obj.keyframes) {
      kf_indices.push_back(kf.frame->index);
      kf_poses.push_back(kf.frame->pose);
    }
    std::ofstream poses(fs::path(out_dir) / "models" / (std::string(stem) + ".poses.txt"));
    poses.precision(17);
    for (size_t i = 0; i < kf_poses.size(); ++i) {
      poses << kf_indices[i];
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
          double v = r < 3 ? (c < 3 ? kf_poses[i].rotation(r, c) : kf_poses[i].translation[r])
                           : (c == 3 ? 1.0 : 0.0);
          poses << " " << v;
        }
      poses << "\n";
    }

    std::ofstream meta(fs::path(out_dir) / "models" / (std::string(stem) + ".meta.txt"));
    meta << "category " << (obj.category ? *obj.category : -1) << "\n";

    mesh::TriangleMesh m = mesh::extract_mesh(obj.model, config.mesh_resolution_m, true);
    mesh::write_ply(m, (fs::path(out_dir) / "meshes" / (std::string(stem) + ".ply")).string());
  }
  return result;
}

void build_library_from_fit(const std::string& fit_dir, const std::string& out_dir,
                            const RunConfig& config) {
  fs::path models = fs::path(fit_dir) / "models";
  if (!fs::is_directory(models)) models = fit_dir;  // allow pointing at models/ directly

  library::ObjectLibrary lib;
  std::vector<fs::path> archives;
  for (const auto& item : fs::directory_iterator(models))
    if (item.path().extension() == ".model") archives.push_back(item.path());
  std::sort(archives.begin(), archives.end());
  if (archives.empty()) throw std::runtime_error("no .model archives under " + models.string());

  for (const fs::path& archive : archives) {
    field::ObjectModel model = load_model(archive.string());
    std::string stem = archive.stem().string();

    std::vector<Pose> poses;
    std::ifstream pose_file(models / (stem + ".poses.txt"));
    if (!pose_file)
      throw std::runtime_error("missing keyframe poses for " + archive.string());
    long index;
    while (pose_file >> index) {
      double m[16];
      for (double& v : m)
        if (!(pose_file >> v)) throw std::runtime_error("malformed poses for " + stem);
      Pose pose;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) pose.rotation(r, c) = m[r * 4 + c];
        pose.translation[r] = m[r * 4 + 3];
      }
      poses.push_back(pose);
    }
    if (poses.empty()) throw std::runtime_error("no keyframe poses for " + stem);

    int category = -1;
    std::ifstream meta(models / (stem + ".meta.txt"));
    std::string key;
    while (meta >> key)
      if (key == "category") meta >> category;

    Intrinsics intr;
    std::ifstream intr_file(models / "intrinsics.txt");
    if (intr_file) {
      intr_file >> intr.fx >> intr.fy >> intr.cx >> intr.cy >> intr.width >> intr.height >>
          intr.depth_scale;
    } else {
      intr.width = 320;
      intr.height = 240;
      intr.fx = intr.fy = 300;
      intr.cx = 160;
      intr.cy = 120;
    }

    library::BuildEntryParams params;
    params.voxel = config.library.voxel_m;
    params.fpfh_radius_factor = config.library.fpfh_radius_factor;
    params.normals_k = config.library.normals_k;
    lib.entries.push_back(library::build_entry(model, poses, intr, category,
                                               library::EntrySource::prior_video, params, stem));
  }
  library::save_library(lib, out_dir);
}

std::vector<EvalRecord> evaluate_meshes(const std::string& pred_path, const std::string& gt_path,
                                        const std::vector<double>& thresholds_m, bool seen_only,
                                        const std::string& frames_dir, double cull_tau_m) {
  auto collect = [](const std::string& path) {
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
      for (const auto& item : fs::directory_iterator(path))
        if (item.path().extension() == ".ply") files.push_back(item.path());
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(path);
    }
    return files;
  };
  std::vector<fs::path> preds = collect(pred_path);
  std::vector<fs::path> gts = collect(gt_path);
  if (preds.empty() || gts.empty())
    throw std::runtime_error("no PLY meshes found to evaluate");

  std::vector<Frame> frames;
  if (seen_only) {
    if (frames_dir.empty())
      throw std::runtime_error("--seen-only needs --frames <dataset dir> for culling");
    Dataset dataset(frames_dir);
    for (size_t i = 0; i < dataset.size(); ++i) frames.push_back(dataset.load(i));
  }

  std::vector<EvalRecord> records;
  for (const fs::path& pred : preds) {
    // match by stem, else fall back to a single ground-truth mesh
    fs::path gt;
    for (const fs::path& candidate : gts)
      if (candidate.stem() == pred.stem()) gt = candidate;
    if (gt.empty()) {
      if (gts.size() == 1 && preds.size() == 1) gt = gts[0];
      else continue;
    }
    mesh::TriangleMesh pred_mesh = mesh::read_ply(pred.string());
    mesh::TriangleMesh gt_mesh = mesh::read_ply(gt.string());
    if (seen_only) gt_mesh = mesh::cull_unseen(gt_mesh, frames, cull_tau_m);
    if (pred_mesh.empty() || gt_mesh.empty())
      throw std::runtime_error("empty mesh while evaluating " + pred.string());
    records.push_back({pred.stem().string(), evaluate_mesh(pred_mesh, gt_mesh, thresholds_m)});
  }
  if (records.empty()) throw std::runtime_error("no pred/gt mesh pairs matched by filename");
  return records;
}

std::string format_eval_records(const std::vector<EvalRecord>& records) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(3);
  auto label = [](double threshold_m) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "cr_%gcm", threshold_m * 100.0);
    return std::string(buf);
  };
  mesh::MetricReport mean;
  mean.thresholds_m = records.front().report.thresholds_m;
  mean.completion_ratios.assign(mean.thresholds_m.size(), 0.0);

  for (const EvalRecord& rec : records) {
    out << "object " << rec.name << " accuracy_cm " << rec.report.accuracy_cm
        << " completion_cm " << rec.report.completion_cm;
    for (size_t t = 0; t < rec.report.thresholds_m.size(); ++t) {
      out << " " << label(rec.report.thresholds_m[t]) << " " << rec.report.completion_ratios[t];
      mean.completion_ratios[t] += rec.report.completion_ratios[t];
    }
    out << "\n";
    mean.accuracy_cm += rec.report.accuracy_cm;
    mean.completion_cm += rec.report.completion_cm;
  }
  double n = static_cast<double>(records.size());
  out << "mean accuracy_cm " << mean.accuracy_cm / n << " completion_cm "
      << mean.completion_cm / n;
  for (size_t t = 0; t < mean.thresholds_m.size(); ++t)
    out << " " << label(mean.thresholds_m[t]) << " " << mean.completion_ratios[t] / n;
  out << "\n";
  return out.str();
}

int worker_count_from_env() {
  if (const char* env = std::getenv("OBJRECON_THREADS")) {
    int count = std::atoi(env);
    if (count >= 1) return count;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace objrecon::io
