#include "objrecon/library/library.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "objrecon/core/ops.hpp"
#include "objrecon/io/archive.hpp"

namespace objrecon::library {

namespace fs = std::filesystem;

namespace {

std::vector<size_t> strided_subset(size_t total, size_t max_count) {
  std::vector<size_t> out;
  if (total == 0) return out;
  size_t count = std::min(total, max_count);
  for (size_t i = 0; i < count; ++i) out.push_back(i * total / count);
  return out;
}

}  // namespace

LibraryEntry build_entry(const field::ObjectModel& model, std::span<const Pose> keyframe_poses,
                         const Intrinsics& intrinsics, int category, EntrySource source,
                         const BuildEntryParams& params, const std::string& name) {
  if (keyframe_poses.empty()) throw std::invalid_argument("entry needs keyframe poses");

  // Render depth from the stored poses and backproject into a world cloud;
  // normals come per view so they can be oriented toward the camera.
  PointCloud merged;
  std::vector<render::RenderedView> color_views;
  const auto cloud_views = strided_subset(keyframe_poses.size(), params.max_cloud_views);
  const auto descriptor_views = strided_subset(keyframe_poses.size(), params.max_descriptor_views);

  const float edge_delta = static_cast<float>(std::max(0.01, 2.0 * params.voxel));
  for (size_t vi : cloud_views) {
    render::RenderedView view =
        render::render_view(model, keyframe_poses[vi], intrinsics, params.n_ray_samples);
    PointCloud view_cloud;
    // silhouette-adjacent pixels carry smeared depth; keep interior ones only
    auto solid = [&](int x, int y) {
      return view.mask.contains(x, y) && view.mask.at(x, y) >= 0.5f && view.depth.at(x, y) > 0;
    };
    for (int y = 0; y < view.depth.height; ++y) {
      for (int x = 0; x < view.depth.width; ++x) {
        if (!solid(x, y)) continue;
        float d = view.depth.at(x, y);
        bool interior = solid(x - 1, y) && solid(x + 1, y) && solid(x, y - 1) && solid(x, y + 1);
        if (!interior) continue;
        if (std::abs(view.depth.at(x - 1, y) - d) > edge_delta ||
            std::abs(view.depth.at(x + 1, y) - d) > edge_delta ||
            std::abs(view.depth.at(x, y - 1) - d) > edge_delta ||
            std::abs(view.depth.at(x, y + 1) - d) > edge_delta)
          continue;
        view_cloud.points.push_back(backproject_pixel(x, y, d, view.pose, intrinsics));
      }
    }
    view_cloud = voxel_downsample(view_cloud, params.voxel);
    if (static_cast<int>(view_cloud.size()) >= params.normals_k) {
      view_cloud.normals =
          estimate_normals(view_cloud, params.normals_k, view.pose.translation);
      merged.append(view_cloud);
    }
    if (std::find(descriptor_views.begin(), descriptor_views.end(), vi) !=
        descriptor_views.end())
      color_views.push_back(std::move(view));
  }
  if (merged.empty()) throw std::runtime_error("model renders no surface; cannot build entry");
  merged = voxel_downsample(merged, params.voxel);

  std::vector<ObjectView> views;
  views.reserve(color_views.size());
  for (const auto& view : color_views) views.push_back(view_from_render(view));
  Eigen::VectorXd descriptor = compute_view_descriptor(views);

  // Re-express the cloud and poses in the object (box) frame.
  const Mat3 r = model.box.rotation;
  const Vec3 c = model.box.center;
  LibraryEntry entry;
  entry.name = name;
  entry.category = category;
  entry.source = source;
  entry.descriptor = std::move(descriptor);
  entry.cloud.points.reserve(merged.size());
  entry.cloud.normals.reserve(merged.size());
  for (size_t i = 0; i < merged.size(); ++i) {
    entry.cloud.points.push_back(r.transpose() * (merged.points[i] - c));
    entry.cloud.normals.push_back(r.transpose() * merged.normals[i]);
  }
  entry.fpfh = compute_fpfh(entry.cloud, params.fpfh_radius_factor * params.voxel);
  for (const Pose& pose : keyframe_poses)
    entry.keyframe_poses.push_back(
        {r.transpose() * pose.rotation, r.transpose() * (pose.translation - c)});

  entry.model = model;
  entry.model.box = {model.box.extent, Mat3::Identity(), Vec3::Zero()};
  entry.model.frozen_geo_grid = entry.model.frozen_geo_mlp = false;
  entry.model.frozen_col_grid = entry.model.frozen_col_mlp = false;
  entry.model.opt = field::AdamMoments::like(entry.model);
  return entry;
}

std::vector<RetrievalCandidate> retrieve(const ObjectLibrary& lib, const Eigen::VectorXd& query,
                                         std::optional<int> category, int m, double threshold) {
  if (m < 1) throw std::invalid_argument("retrieval needs m >= 1");
  std::vector<RetrievalCandidate> candidates;
  for (size_t i = 0; i < lib.entries.size(); ++i) {
    const LibraryEntry& entry = lib.entries[i];
    if (category && entry.category >= 0 && entry.category != *category) continue;
    double sim = cosine_similarity(query, entry.descriptor);
    if (sim >= threshold) candidates.push_back({static_cast<int>(i), sim});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.similarity > b.similarity; });
  if (static_cast<int>(candidates.size()) > m) candidates.resize(m);
  return candidates;
}

BoundPrior bind_prior(const LibraryEntry& entry, const Pose& object_to_world, bool freeze_grids) {
  BoundPrior bound;
  bound.model = entry.model;
  bound.model.box = {entry.model.box.extent, object_to_world.rotation,
                     object_to_world.translation};
  bound.model.freeze_mlps();
  if (freeze_grids) bound.model.freeze_all();
  bound.model.opt = field::AdamMoments::like(bound.model);

  auto snapshot = std::make_shared<field::ObjectModel>(bound.model);
  snapshot->freeze_all();
  bound.binding.snapshot = std::move(snapshot);
  bound.binding.object_to_world = object_to_world;
  for (const Pose& pose : entry.keyframe_poses)
    bound.binding.stored_poses_world.push_back(object_to_world.compose(pose));
  return bound;
}

std::vector<render::RenderedView> synthesize_keyframes(const field::ObjectModel& snapshot,
                                                       std::span<const Pose> poses_world,
                                                       const Intrinsics& intrinsics, int count,
                                                       int n_ray_samples, std::mt19937_64& rng) {
  if (count < 1) throw std::invalid_argument("synthesis count must be >= 1");
  if (poses_world.empty()) throw std::invalid_argument("no stored poses to synthesize from");

  std::vector<size_t> order(poses_world.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<render::RenderedView> views;
  views.reserve(count);
  for (int i = 0; i < count; ++i) {
    size_t j;
    if (i < static_cast<int>(order.size())) {
      std::uniform_int_distribution<size_t> pick(i, order.size() - 1);
      std::swap(order[i], order[pick(rng)]);
      j = order[i];
    } else {
      std::uniform_int_distribution<size_t> pick(0, order.size() - 1);
      j = pick(rng);
    }
    views.push_back(render::render_view(snapshot, poses_world[j], intrinsics, n_ray_samples));
  }
  return views;
}

namespace {

void write_cloud(const fs::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  uint64_t count = cloud.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (size_t i = 0; i < cloud.size(); ++i) {
    float rec[6] = {static_cast<float>(cloud.points[i].x()),
                    static_cast<float>(cloud.points[i].y()),
                    static_cast<float>(cloud.points[i].z()),
                    static_cast<float>(cloud.normals[i].x()),
                    static_cast<float>(cloud.normals[i].y()),
                    static_cast<float>(cloud.normals[i].z())};
    out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
  }
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

PointCloud read_cloud(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  PointCloud cloud;
  cloud.points.reserve(count);
  cloud.normals.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    float rec[6];
    in.read(reinterpret_cast<char*>(rec), sizeof(rec));
    cloud.points.emplace_back(rec[0], rec[1], rec[2]);
    cloud.normals.emplace_back(rec[3], rec[4], rec[5]);
  }
  if (!in) throw std::runtime_error("truncated cloud file " + path.string());
  return cloud;
}

void write_vectors(const fs::path& path, const std::vector<Eigen::VectorXd>& rows, int dim) {
  std::ofstream out(path, std::ios::binary);
  uint64_t count = rows.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& row : rows) {
    for (int i = 0; i < dim; ++i) {
      float v = row.size() > i ? static_cast<float>(row[i]) : 0.0f;
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::vector<Eigen::VectorXd> read_vectors(const fs::path& path, int dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  std::vector<Eigen::VectorXd> rows(count, Eigen::VectorXd::Zero(dim));
  for (auto& row : rows) {
    for (int i = 0; i < dim; ++i) {
      float v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      row[i] = v;
    }
  }
  if (!in) throw std::runtime_error("truncated feature file " + path.string());
  return rows;
}

}  // namespace

void save_library(const ObjectLibrary& lib, const std::string& directory) {
  fs::create_directories(directory);
  for (size_t i = 0; i < lib.entries.size(); ++i) {
    const LibraryEntry& entry = lib.entries[i];
    std::string name = entry.name.empty() ? "entry_" + std::to_string(i) : entry.name;
    fs::path dir = fs::path(directory) / name;
    fs::create_directories(dir);

    io::save_model(entry.model, (dir / "model.bin").string(), false);
    write_cloud(dir / "cloud.bin", entry.cloud);
    write_vectors(dir / "fpfh.bin", entry.fpfh.features, kFpfhSize);
    write_vectors(dir / "descriptor.bin", {entry.descriptor},
                  static_cast<int>(entry.descriptor.size()));

    std::ofstream poses(dir / "poses.txt");
    poses.precision(17);
    for (const Pose& pose : entry.keyframe_poses) {
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
          double v = r < 3 ? (c < 3 ? pose.rotation(r, c) : pose.translation[r])
                           : (c == 3 ? 1.0 : 0.0);
          poses << v << (r == 3 && c == 3 ? "" : " ");
        }
      poses << "\n";
    }

    std::ofstream meta(dir / "meta.txt");
    meta.precision(17);
    meta << "category " << entry.category << "\n";
    meta << "source "
         << (entry.source == EntrySource::mesh_renders ? "mesh_renders" : "prior_video") << "\n";
    meta << "extent " << entry.model.box.extent.x() << " " << entry.model.box.extent.y() << " "
         << entry.model.box.extent.z() << "\n";
    if (!meta || !poses) throw std::runtime_error("cannot write entry " + dir.string());
  }
}

ObjectLibrary load_library(const std::string& directory) {
  ObjectLibrary lib;
  if (!fs::is_directory(directory))
    throw std::runtime_error("library directory missing: " + directory);
  std::vector<fs::path> dirs;
  for (const auto& item : fs::directory_iterator(directory))
    if (item.is_directory()) dirs.push_back(item.path());
  std::sort(dirs.begin(), dirs.end());

  for (const fs::path& dir : dirs) {
    LibraryEntry entry;
    entry.name = dir.filename().string();
    entry.model = io::load_model((dir / "model.bin").string());
    entry.cloud = read_cloud(dir / "cloud.bin");
    auto features = read_vectors(dir / "fpfh.bin", kFpfhSize);
    entry.fpfh.features = std::move(features);
    entry.fpfh.isolated.assign(entry.fpfh.features.size(), 0);
    for (size_t i = 0; i < entry.fpfh.features.size(); ++i)
      entry.fpfh.isolated[i] = entry.fpfh.features[i].isZero() ? 1 : 0;
    auto desc = read_vectors(dir / "descriptor.bin", kDescriptorSize);
    if (desc.empty()) throw std::runtime_error("missing descriptor in " + dir.string());
    entry.descriptor = desc[0];

    std::ifstream poses(dir / "poses.txt");
    double m[16];
    while (poses >> m[0]) {
      for (int i = 1; i < 16; ++i)
        if (!(poses >> m[i])) throw std::runtime_error("malformed poses in " + dir.string());
      Pose pose;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) pose.rotation(r, c) = m[r * 4 + c];
        pose.translation[r] = m[r * 4 + 3];
      }
      entry.keyframe_poses.push_back(pose);
    }

    std::ifstream meta(dir / "meta.txt");
    std::string key;
    while (meta >> key) {
      if (key == "category") meta >> entry.category;
      else if (key == "source") {
        std::string source;
        meta >> source;
        entry.source =
            source == "mesh_renders" ? EntrySource::mesh_renders : EntrySource::prior_video;
      } else if (key == "extent") {
        Vec3 extent;
        meta >> extent.x() >> extent.y() >> extent.z();
      }
    }
    lib.entries.push_back(std::move(entry));
  }
  return lib;
}

}  // namespace objrecon::library
