#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>

#include "objrecon/core/depth_filter.hpp"
#include "objrecon/core/ops.hpp"
#include "objrecon/library/library.hpp"
#include "objrecon/render/train.hpp"

namespace objrecon::objmap {

enum class GridUpdateMode { interpolate, reinitialize };

struct MapperConfig {
  field::GridConfig grid;
  render::RaySampleConfig rays;
  render::LossWeights losses;
  render::AdamWConfig optim;
  int total_rays = 9600;        // scene-wide ray budget per step
  int keyframes_per_step = 6;
  int keyframe_every = 25;
  int keyframe_buffer = 20;
  int min_mask_pixels = 100;
  double box_margin = 0.10;
  int steps_per_frame = 3;
  double coarse_voxel_m = 0.01;
  double min_extent_m = 0.02;
  int extension_hysteresis = 1;  // frames with outside points before growing
  int min_rays_per_object = 64;
  int rect_margin_px = 10;       // sampling border around the mask bbox
  GridUpdateMode grid_update = GridUpdateMode::interpolate;
  bool depth_filter_enabled = false;
  DepthFilterConfig depth_filter;
};

/// How a retrieved prior participates in new sessions.
struct LibraryUseConfig {
  int top_m = 3;
  double similarity_threshold = 0.7;
  double fitness_threshold = 0.8;
  double reproj_in_mask = 0.90;
  double depth_tolerance_m = 0.02;
  double voxel_m = 0.01;
  double fpfh_radius_factor = 2.5;
  double inlier_factor = 1.5;
  int normals_k = 16;
  bool freeze_grids = false;  // freeze the whole prior, not just its MLPs
  bool synthesize = true;
};

enum class EventKind {
  object_created,
  box_extended,
  keyframe_stored,
  keyframe_evicted,
  prior_attach_attempted,
  prior_attached,
};

struct Event {
  long frame = 0;
  int object = 0;
  EventKind kind = EventKind::object_created;
  std::string detail;
};

std::string to_string(EventKind kind);
std::string to_json_line(const Event& event);

struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return width() <= 0 || height() <= 0; }
};

struct Keyframe {
  enum class Origin { observed, synthesized };
  std::shared_ptr<const Frame> frame;
  int instance_id = 0;
  PixelRect rect;                 // mask bbox + margin, the sampling region
  std::vector<int> mask_pixels;   // flat indices of masked valid-depth pixels
  Origin origin = Origin::observed;
};

struct ObjectState {
  int id = 0;
  std::optional<int> category;
  field::ObjectModel model;
  PointCloud coarse_cloud;
  std::deque<Keyframe> keyframes;  // bounded buffer
  std::deque<Keyframe> running;    // the two most recent sightings
  std::optional<library::PriorBinding> prior;
  long first_seen = -1;
  int extension_count = 0;
  int outside_streak = 0;
  bool retrieval_failed = false;  // retry on the next box growth
  std::vector<double> loss_history;  // mean total loss per trained frame
  std::mt19937_64 rng;
  render::TrainWorkspace workspace;

  bool has_training_frames() const { return !keyframes.empty() || !running.empty(); }
};

struct SceneState {
  MapperConfig config;
  uint64_t seed = 0;
  std::map<int, ObjectState> objects;  // ordered for deterministic iteration
  long last_frame = -1;
  std::vector<Event> events;
};

/// Folds one posed frame into the scene: discovers qualifying instances,
/// grows coarse clouds and boxes, stores keyframes on the keyframe cadence.
/// Returns the events it appended. Frames must arrive in increasing order.
std::vector<Event> ingest_frame(SceneState& scene, std::shared_ptr<const Frame> frame);

/// Grows the object's box when new points escaped it: recomputes the margin
/// box over the coarse cloud (never shrinking), remaps both feature grids and
/// resets the grid optimizer moments. Returns whether an extension happened.
bool maybe_extend_box(SceneState& scene, ObjectState& obj, const PointCloud& new_points);

struct FrameSelection {
  std::vector<const Keyframe*> observed;
  std::vector<Pose> synth_poses;  // camera-to-world, rendered from the prior
};

/// Uniform random keyframe pick without replacement from buffer + running
/// frames. With an attached prior, half the slots go to synthesized views.
FrameSelection select_keyframes(ObjectState& obj, int count, std::mt19937_64& rng);

/// One optimization step for one object at the given ray budget.
render::TrainStats train_object_step(SceneState& scene, ObjectState& obj, int n_rays);

/// steps_per_frame optimization steps for every live object, objects run in
/// parallel across `threads` workers (deterministic regardless of count).
void train_all_objects(SceneState& scene, int threads);

/// Retrieval, registration, verification and binding of a library prior for
/// one object against the current frame. Appends events; returns success.
bool attempt_prior_attach(SceneState& scene, ObjectState& obj, const Frame& frame,
                          const library::ObjectLibrary& lib, const LibraryUseConfig& lib_cfg);

/// Streams frames through the scene: ingest, prior attachment on creation
/// and on box growth, then per-object training. The callback (when set) runs
/// after each frame's training.
void run_sequence(SceneState& scene,
                  const std::function<std::shared_ptr<const Frame>()>& next_frame,
                  const library::ObjectLibrary* lib, const LibraryUseConfig& lib_cfg,
                  int threads,
                  const std::function<void(SceneState&, long)>& per_frame = {});

}  // namespace objrecon::objmap
