#pragma once

#include <memory>
#include <optional>
#include <string>

#include "objrecon/library/descriptor.hpp"
#include "objrecon/library/registration.hpp"

namespace objrecon::library {

enum class EntrySource { mesh_renders, prior_video };

/// Persisted prior object. The model box lives in the entry's object frame
/// (identity rotation, zero center), as do the cloud and keyframe poses.
struct LibraryEntry {
  std::string name;
  field::ObjectModel model;
  PointCloud cloud;                      // with normals
  FpfhFeatures fpfh;
  Eigen::VectorXd descriptor;            // unit norm
  std::vector<Pose> keyframe_poses;      // camera-to-object
  int category = -1;                     // -1 = unknown
  EntrySource source = EntrySource::prior_video;

  Vec3 box_extent() const { return model.box.extent; }
};

struct ObjectLibrary {
  std::vector<LibraryEntry> entries;
  bool empty() const { return entries.empty(); }
};

struct RetrievalCandidate {
  int entry = -1;
  double similarity = -1;
};

struct BuildEntryParams {
  double voxel = 0.01;
  double fpfh_radius_factor = 2.5;  // times voxel
  int normals_k = 16;
  int n_ray_samples = 96;  // dense sampling keeps the backprojected depth sharp
  int max_cloud_views = 20;
  int max_descriptor_views = 10;
};

/// Renders the model from its stored keyframe poses, backprojects the depth
/// into a coarse cloud with normals, computes FPFH and the averaged view
/// descriptor, and re-expresses everything in the object (box) frame.
/// Throws when the model renders no surface from any pose.
LibraryEntry build_entry(const field::ObjectModel& model, std::span<const Pose> keyframe_poses,
                         const Intrinsics& intrinsics, int category, EntrySource source,
                         const BuildEntryParams& params = {}, const std::string& name = {});

/// Same-category entries ranked by cosine similarity, top m, filtered at the
/// similarity threshold.
std::vector<RetrievalCandidate> retrieve(const ObjectLibrary& lib, const Eigen::VectorXd& query,
                                         std::optional<int> category, int m, double threshold);

/// A prior attached to a live object: a frozen world-frame copy used to
/// synthesize supervision, plus the poses it can be rendered from.
struct PriorBinding {
  std::shared_ptr<const field::ObjectModel> snapshot;
  std::vector<Pose> stored_poses_world;  // camera-to-world
  Pose object_to_world;
  int entry = -1;
  bool synthesize = true;
};

struct BoundPrior {
  field::ObjectModel model;
  PriorBinding binding;
};

/// Instantiates an entry at a registered pose: the returned model is a copy
/// of the prior with MLPs frozen (grids too when freeze_grids) and a fresh
/// optimizer, anchored to the transformed box.
BoundPrior bind_prior(const LibraryEntry& entry, const Pose& object_to_world, bool freeze_grids);

/// Renders `count` views of a frozen prior from a sample of its stored poses.
std::vector<render::RenderedView> synthesize_keyframes(const field::ObjectModel& snapshot,
                                                       std::span<const Pose> poses_world,
                                                       const Intrinsics& intrinsics, int count,
                                                       int n_ray_samples, std::mt19937_64& rng);

// Directory persistence; one subdirectory per entry holding the model
// archive, cloud, fpfh, descriptor, poses and metadata.
void save_library(const ObjectLibrary& lib, const std::string& directory);
ObjectLibrary load_library(const std::string& directory);

}  // namespace objrecon::library
