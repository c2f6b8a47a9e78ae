#include "objrecon/objmap/scene.hpp"

#include <json.hpp>
#include <thread>

#include "objrecon/render/view.hpp"

namespace objrecon::objmap {

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::object_created: return "object_created";
    case EventKind::box_extended: return "box_extended";
    case EventKind::keyframe_stored: return "keyframe_stored";
    case EventKind::keyframe_evicted: return "keyframe_evicted";
    case EventKind::prior_attach_attempted: return "prior_attach_attempted";
    case EventKind::prior_attached: return "prior_attached";
  }
  return "unknown";
}

std::string to_json_line(const Event& event) {
  nlohmann::json j;
  j["frame"] = event.frame;
  j["object"] = event.object;
  j["event"] = to_string(event.kind);
  if (!event.detail.empty()) j["detail"] = event.detail;
  return j.dump();
}

namespace {

std::mt19937_64 object_rng(uint64_t seed, int object_id) {
  // splitmix-style mix keeps per-object streams independent of each other
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<uint64_t>(object_id) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return std::mt19937_64(z ^ (z >> 31));
}

struct InstanceScan {
  int mask_count = 0;
  int valid_count = 0;
  PixelRect bbox{INT32_MAX, INT32_MAX, INT32_MIN, INT32_MIN};
  std::vector<int> valid_pixels;
};

PointCloud backproject_pixels(const Frame& frame, const std::vector<int>& pixels) {
  PointCloud cloud;
  cloud.points.reserve(pixels.size());
  const int w = frame.depth.width;
  for (int idx : pixels) {
    int x = idx % w, y = idx / w;
    float d = frame.depth.data[idx];
    if (d <= 0) continue;
    cloud.points.push_back(backproject_pixel(x, y, d, frame.pose, frame.intrinsics));
  }
  return cloud;
}

Keyframe make_keyframe(std::shared_ptr<const Frame> frame, int instance_id,
                       const InstanceScan& scan, int margin_px) {
  Keyframe kf;
  kf.frame = std::move(frame);
  kf.instance_id = instance_id;
  kf.rect = {std::max(0, scan.bbox.x0 - margin_px), std::max(0, scan.bbox.y0 - margin_px),
             std::min(kf.frame->masks.width, scan.bbox.x1 + margin_px),
             std::min(kf.frame->masks.height, scan.bbox.y1 + margin_px)};
  kf.mask_pixels = scan.valid_pixels;
  kf.origin = Keyframe::Origin::observed;
  return kf;
}

// Union of two boxes sharing one rotation, expressed as a box again.
BoxTransform box_union(const BoxTransform& a, const BoxTransform& b) {
  const Mat3& r = a.rotation;
  Vec3 ca = r.transpose() * a.center;
  Vec3 cb = r.transpose() * b.center;
  Vec3 lo = (ca - a.extent * 0.5).cwiseMin(cb - b.extent * 0.5);
  Vec3 hi = (ca + a.extent * 0.5).cwiseMax(cb + b.extent * 0.5);
  BoxTransform out;
  out.rotation = r;
  out.center = r * ((lo + hi) * 0.5);
  out.extent = hi - lo;
  return out;
}

}  // namespace

std::vector<Event> ingest_frame(SceneState& scene, std::shared_ptr<const Frame> frame) {
  if (frame->index <= scene.last_frame)
    throw std::invalid_argument("frames must arrive with increasing indices");
  scene.last_frame = frame->index;
  const MapperConfig& cfg = scene.config;
  std::vector<Event> events;
  auto emit = [&](int object, EventKind kind, std::string detail = {}) {
    events.push_back({frame->index, object, kind, std::move(detail)});
  };

  // One pass over the masks collecting per-instance stats.
  std::map<int, InstanceScan> scans;
  const int w = frame->masks.width, h = frame->masks.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int id = frame->masks.at(x, y);
      if (id == 0) continue;
      InstanceScan& s = scans[id];
      s.mask_count++;
      s.bbox.x0 = std::min(s.bbox.x0, x);
      s.bbox.y0 = std::min(s.bbox.y0, y);
      s.bbox.x1 = std::max(s.bbox.x1, x + 1);
      s.bbox.y1 = std::max(s.bbox.y1, y + 1);
      if (frame->depth.at(x, y) > 0) {
        s.valid_count++;
        s.valid_pixels.push_back(y * w + x);
      }
    }
  }

  for (auto& [id, scan] : scans) {
    std::shared_ptr<const Frame> obj_frame = frame;
    if (cfg.depth_filter_enabled && scan.valid_count >= cfg.min_mask_pixels) {
      obj_frame = std::make_shared<Frame>(filter_depth_outliers(*frame, id, cfg.depth_filter));
      scan.valid_pixels.erase(
          std::remove_if(scan.valid_pixels.begin(), scan.valid_pixels.end(),
                         [&](int idx) { return obj_frame->depth.data[idx] <= 0; }),
          scan.valid_pixels.end());
      scan.valid_count = static_cast<int>(scan.valid_pixels.size());
    }
    if (scan.valid_count < cfg.min_mask_pixels) continue;

    PointCloud new_points = backproject_pixels(*obj_frame, scan.valid_pixels);
    PointCloud new_coarse = voxel_downsample(new_points, cfg.coarse_voxel_m);

    auto it = scene.objects.find(id);
    if (it == scene.objects.end()) {
      ObjectState obj;
      obj.id = id;
      obj.category = obj_frame->category_of(id);
      obj.first_seen = frame->index;
      obj.coarse_cloud = new_coarse;
      obj.rng = object_rng(scene.seed, id);
      BoxTransform box =
          update_bounding_box(obj.coarse_cloud, cfg.box_margin, cfg.min_extent_m);
      obj.model = field::ObjectModel::create(cfg.grid, box, obj.rng);
      it = scene.objects.emplace(id, std::move(obj)).first;
      emit(id, EventKind::object_created);
    } else {
      ObjectState& obj = it->second;
      obj.coarse_cloud.append(new_coarse);
      obj.coarse_cloud = voxel_downsample(obj.coarse_cloud, cfg.coarse_voxel_m);
      if (maybe_extend_box(scene, obj, new_coarse)) {
        char detail[128];
        std::snprintf(detail, sizeof(detail), "extent=%.4f,%.4f,%.4f",
                      obj.model.box.extent.x(), obj.model.box.extent.y(),
                      obj.model.box.extent.z());
        emit(id, EventKind::box_extended, detail);
      }
    }

    ObjectState& obj = it->second;
    Keyframe kf = make_keyframe(obj_frame, id, scan, cfg.rect_margin_px);
    obj.running.push_back(kf);
    while (obj.running.size() > 2) obj.running.pop_front();

    if (frame->index % cfg.keyframe_every == 0) {
      obj.keyframes.push_back(std::move(kf));
      if (static_cast<int>(obj.keyframes.size()) > cfg.keyframe_buffer) {
        // FIFO eviction that pins the first stored keyframe
        long evicted = obj.keyframes[1].frame->index;
        obj.keyframes.erase(obj.keyframes.begin() + 1);
        emit(id, EventKind::keyframe_evicted, "frame=" + std::to_string(evicted));
      }
      emit(id, EventKind::keyframe_stored);
    }
  }

  scene.events.insert(scene.events.end(), events.begin(), events.end());
  return events;
}

bool maybe_extend_box(SceneState& scene, ObjectState& obj, const PointCloud& new_points) {
  const MapperConfig& cfg = scene.config;
  bool any_outside = false;
  for (const Vec3& p : new_points.points) {
    if (!obj.model.box.contains(p)) {
      any_outside = true;
      break;
    }
  }
  if (!any_outside) {
    obj.outside_streak = 0;
    return false;
  }
  if (++obj.outside_streak < cfg.extension_hysteresis) return false;
  obj.outside_streak = 0;

  BoxTransform old_box = obj.model.box;
  BoxTransform grown = update_bounding_box_oriented(obj.coarse_cloud, old_box.rotation,
                                                    cfg.box_margin, cfg.min_extent_m);
  BoxTransform new_box = box_union(old_box, grown);
  if ((new_box.extent - old_box.extent).cwiseAbs().maxCoeff() < 1e-12 &&
      (new_box.center - old_box.center).cwiseAbs().maxCoeff() < 1e-12)
    return false;

  if (cfg.grid_update == GridUpdateMode::interpolate) {
    BoxTransform delta = field::box_change(old_box, new_box);
    obj.model.geo_grid = field::reinterpolate_grid(obj.model.geo_grid, delta, obj.rng);
    obj.model.col_grid = field::reinterpolate_grid(obj.model.col_grid, delta, obj.rng);
  } else {
    obj.model.geo_grid = field::FeatureGrid::create(cfg.grid, obj.rng);
    obj.model.col_grid = field::FeatureGrid::create(cfg.grid, obj.rng);
  }
  obj.model.box = new_box;
  obj.model.opt.reset_grids(obj.model);
  obj.extension_count++;
  return true;
}

FrameSelection select_keyframes(ObjectState& obj, int count, std::mt19937_64& rng) {
  if (count < 1) throw std::invalid_argument("keyframe selection count must be >= 1");
  std::vector<const Keyframe*> candidates;
  for (const Keyframe& kf : obj.keyframes) candidates.push_back(&kf);
  for (const Keyframe& kf : obj.running) {
    bool duplicate = false;
    for (const Keyframe* existing : candidates)
      duplicate |= existing->frame->index == kf.frame->index;
    if (!duplicate) candidates.push_back(&kf);
  }
  if (candidates.empty()) throw std::runtime_error("no keyframes to select from");

  FrameSelection sel;
  int n_synth = 0;
  const bool use_prior =
      obj.prior && obj.prior->synthesize && !obj.prior->stored_poses_world.empty();
  if (use_prior) n_synth = count / 2;
  int n_observed = count - n_synth;

  // partial Fisher-Yates for a uniform draw without replacement
  int take = std::min<int>(n_observed, static_cast<int>(candidates.size()));
  for (int i = 0; i < take; ++i) {
    std::uniform_int_distribution<size_t> pick(i, candidates.size() - 1);
    std::swap(candidates[i], candidates[pick(rng)]);
    sel.observed.push_back(candidates[i]);
  }

  if (use_prior) {
    const auto& poses = obj.prior->stored_poses_world;
    if (static_cast<int>(poses.size()) <= n_synth) {
      sel.synth_poses = poses;
    } else {
      std::vector<size_t> order(poses.size());
      std::iota(order.begin(), order.end(), 0);
      for (int i = 0; i < n_synth; ++i) {
        std::uniform_int_distribution<size_t> pick(i, order.size() - 1);
        std::swap(order[i], order[pick(rng)]);
        sel.synth_poses.push_back(poses[order[i]]);
      }
    }
  }
  return sel;
}

namespace {

PixelRect projected_box_rect(const BoxTransform& box, const Pose& pose,
                             const Intrinsics& intr, int margin_px) {
  PixelRect rect{INT32_MAX, INT32_MAX, INT32_MIN, INT32_MIN};
  for (int corner = 0; corner < 8; ++corner) {
    Vec3 q(corner & 1 ? 1.0 : 0.0, corner & 2 ? 1.0 : 0.0, corner & 4 ? 1.0 : 0.0);
    PixelProjection p = project_point(box.from_box(q), pose, intr);
    if (!p.in_front) continue;
    rect.x0 = std::min(rect.x0, static_cast<int>(std::floor(p.u)));
    rect.y0 = std::min(rect.y0, static_cast<int>(std::floor(p.v)));
    rect.x1 = std::max(rect.x1, static_cast<int>(std::ceil(p.u)) + 1);
    rect.y1 = std::max(rect.y1, static_cast<int>(std::ceil(p.v)) + 1);
  }
  rect.x0 = std::max(0, rect.x0 - margin_px);
  rect.y0 = std::max(0, rect.y0 - margin_px);
  rect.x1 = std::min(intr.width, rect.x1 + margin_px);
  rect.y1 = std::min(intr.height, rect.y1 + margin_px);
  return rect;
}

}  // namespace

render::TrainStats train_object_step(SceneState& scene, ObjectState& obj, int n_rays) {
  const MapperConfig& cfg = scene.config;
  if (!obj.has_training_frames() || n_rays <= 0) return {};
  FrameSelection sel = select_keyframes(obj, cfg.keyframes_per_step, obj.rng);
  const size_t units = sel.observed.size() + sel.synth_poses.size();
  if (units == 0) return {};

  std::vector<render::RayTarget> batch;
  batch.reserve(n_rays);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  field::FieldEvaluator synth_eval;

  const int per_unit = n_rays / static_cast<int>(units);
  const int extra = n_rays % static_cast<int>(units);
  size_t unit = 0;

  for (const Keyframe* kf : sel.observed) {
    int rays_here = per_unit + (static_cast<int>(unit++) < extra ? 1 : 0);
    const Frame& frame = *kf->frame;
    const int w = frame.masks.width;
    std::uniform_int_distribution<int> px(kf->rect.x0, kf->rect.x1 - 1);
    std::uniform_int_distribution<int> py(kf->rect.y0, kf->rect.y1 - 1);
    std::uniform_int_distribution<size_t> pmask(0, kf->mask_pixels.empty()
                                                       ? 0
                                                       : kf->mask_pixels.size() - 1);
    for (int r = 0; r < rays_here; ++r) {
      int x, y;
      if (!kf->mask_pixels.empty() && coin(obj.rng) < 0.5) {
        int idx = kf->mask_pixels[pmask(obj.rng)];
        x = idx % w;
        y = idx / w;
      } else {
        x = px(obj.rng);
        y = py(obj.rng);
      }
      render::RayTarget ray;
      ray.origin = frame.pose.translation;
      ray.dir = frame.pose.rotation * Vec3((x - frame.intrinsics.cx) / frame.intrinsics.fx,
                                           (y - frame.intrinsics.cy) / frame.intrinsics.fy, 1.0);
      bool in_mask = frame.masks.at(x, y) == obj.id;
      ray.mask = in_mask ? 1.0 : 0.0;
      float d = frame.depth.at(x, y);
      ray.depth = in_mask && d > 0 ? d : 0.0;
      ray.color = Vec3(frame.color.at(x, y, 0), frame.color.at(x, y, 1), frame.color.at(x, y, 2));
      batch.push_back(ray);
    }
  }

  if (!sel.synth_poses.empty()) {
    const field::ObjectModel& snapshot = *obj.prior->snapshot;
    const Intrinsics& intr = sel.observed.empty() ? obj.running.back().frame->intrinsics
                                                  : sel.observed.front()->frame->intrinsics;
    for (const Pose& pose : sel.synth_poses) {
      int rays_here = per_unit + (static_cast<int>(unit++) < extra ? 1 : 0);
      PixelRect rect = projected_box_rect(snapshot.box, pose, intr, cfg.rect_margin_px);
      if (rect.empty()) continue;
      std::uniform_int_distribution<int> px(rect.x0, rect.x1 - 1);
      std::uniform_int_distribution<int> py(rect.y0, rect.y1 - 1);
      for (int r = 0; r < rays_here; ++r) {
        int x = px(obj.rng), y = py(obj.rng);
        render::RayTarget ray;
        ray.origin = pose.translation;
        ray.dir = pose.rotation *
                  Vec3((x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy, 1.0);
        render::RenderSample s =
            render::render_ray(snapshot, ray.origin, ray.dir, cfg.rays.n_synth, synth_eval);
        if (!s.weights.empty()) {
          ray.color = s.color;
          ray.mask = s.mask;
          ray.depth = s.mask >= 0.5 ? s.depth / s.mask : 0.0;
        }
        batch.push_back(ray);
      }
    }
  }

  return render::train_step(obj.model, batch, cfg.rays, cfg.losses, cfg.optim, obj.workspace,
                            obj.rng);
}

void train_all_objects(SceneState& scene, int threads) {
  std::vector<ObjectState*> live;
  for (auto& [id, obj] : scene.objects)
    if (obj.has_training_frames()) live.push_back(&obj);
  if (live.empty()) return;

  const MapperConfig& cfg = scene.config;
  const int n_rays = std::max(cfg.min_rays_per_object,
                              cfg.total_rays / static_cast<int>(live.size()));
  auto train_one = [&](ObjectState* obj) {
    double frame_loss = 0;
    for (int s = 0; s < cfg.steps_per_frame; ++s)
      frame_loss += train_object_step(scene, *obj, n_rays).loss_total;
    obj->loss_history.push_back(frame_loss / std::max(1, cfg.steps_per_frame));
  };

  int workers = std::clamp<int>(threads, 1, static_cast<int>(live.size()));
  if (workers <= 1) {
    for (ObjectState* obj : live) train_one(obj);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t]() {
      for (size_t i = t; i < live.size(); i += workers) train_one(live[i]);
    });
  }
  for (auto& th : pool) th.join();
}

bool attempt_prior_attach(SceneState& scene, ObjectState& obj, const Frame& frame,
                          const library::ObjectLibrary& lib, const LibraryUseConfig& lib_cfg) {
  auto emit = [&](EventKind kind, std::string detail) {
    scene.events.push_back({frame.index, obj.id, kind, std::move(detail)});
  };
  auto fail = [&](const std::string& reason) {
    obj.retrieval_failed = true;
    emit(EventKind::prior_attach_attempted, "failed:" + reason);
    return false;
  };

  if (static_cast<int>(obj.coarse_cloud.size()) < std::max(4, lib_cfg.normals_k))
    return fail("too_few_points");

  library::ObjectView view = library::view_from_frame(frame, obj.id);
  Eigen::VectorXd query;
  try {
    query = library::compute_view_descriptor({&view, 1});
  } catch (const std::exception&) {
    return fail("empty_view");
  }

  auto candidates = library::retrieve(lib, query, obj.category, lib_cfg.top_m,
                                      lib_cfg.similarity_threshold);
  if (candidates.empty()) return fail("no_candidates");

  PointCloud partial = obj.coarse_cloud;
  partial.normals =
      library::estimate_normals(partial, lib_cfg.normals_k, frame.pose.translation);
  library::FpfhFeatures partial_fpfh =
      library::compute_fpfh(partial, lib_cfg.fpfh_radius_factor * lib_cfg.voxel_m);

  library::RegistrationParams rp;
  rp.inlier_distance = lib_cfg.inlier_factor * lib_cfg.voxel_m;
  rp.icp_max_correspondence = 2.0 * lib_cfg.inlier_factor * lib_cfg.voxel_m;

  for (const auto& candidate : candidates) {
    const library::LibraryEntry& entry = lib.entries[candidate.entry];
    if (entry.cloud.size() < 4) continue;
    library::RegistrationResult coarse =
        library::ransac_register(entry.cloud, entry.fpfh, partial, partial_fpfh, rp, obj.rng);
    if (coarse.fitness < lib_cfg.fitness_threshold) continue;
    library::RegistrationResult refined =
        library::icp_point_to_plane(entry.cloud, partial, coarse.transform, rp);
    if (refined.fitness < lib_cfg.fitness_threshold) continue;
    if (!library::verify_registration(refined.transform, entry.cloud, frame, obj.id,
                                      {lib_cfg.reproj_in_mask, lib_cfg.depth_tolerance_m}))
      continue;

    library::BoundPrior bound =
        library::bind_prior(entry, refined.transform, lib_cfg.freeze_grids);
    bound.binding.synthesize = lib_cfg.synthesize;
    obj.model = std::move(bound.model);
    obj.prior = std::move(bound.binding);
    obj.retrieval_failed = false;
    char detail[160];
    std::snprintf(detail, sizeof(detail), "entry=%s,similarity=%.3f,fitness=%.3f",
                  entry.name.c_str(), candidate.similarity, refined.fitness);
    emit(EventKind::prior_attach_attempted, "succeeded");
    emit(EventKind::prior_attached, detail);
    return true;
  }
  return fail("registration");
}

void run_sequence(SceneState& scene,
                  const std::function<std::shared_ptr<const Frame>()>& next_frame,
                  const library::ObjectLibrary* lib, const LibraryUseConfig& lib_cfg,
                  int threads, const std::function<void(SceneState&, long)>& per_frame) {
  while (std::shared_ptr<const Frame> frame = next_frame()) {
    std::vector<Event> events = ingest_frame(scene, frame);
    if (lib && !lib->empty()) {
      std::vector<int> to_try;
      for (const Event& ev : events) {
        ObjectState& obj = scene.objects.at(ev.object);
        if (obj.prior) continue;
        bool fresh = ev.kind == EventKind::object_created;
        bool regrown = ev.kind == EventKind::box_extended && obj.retrieval_failed;
        if ((fresh || regrown) &&
            std::find(to_try.begin(), to_try.end(), ev.object) == to_try.end())
          to_try.push_back(ev.object);
      }
      for (int id : to_try)
        attempt_prior_attach(scene, scene.objects.at(id), *frame, *lib, lib_cfg);
    }
    train_all_objects(scene, threads);
    if (per_frame) per_frame(scene, frame->index);
  }
}

}  // namespace objrecon::objmap
