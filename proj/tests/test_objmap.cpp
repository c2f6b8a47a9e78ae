#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "objrecon/objmap/scene.hpp"
#include "objrecon/synth/gt_mesh.hpp"
#include "test_helpers.hpp"

using namespace objrecon;
using namespace testutil;

namespace {

objmap::MapperConfig fast_config() {
  objmap::MapperConfig cfg;
  cfg.total_rays = 256;
  cfg.steps_per_frame = 1;
  cfg.min_rays_per_object = 32;
  return cfg;
}

std::vector<Frame> sphere_orbit(int frames, const Intrinsics& intr) {
  synth::Primitive sphere;
  sphere.kind = synth::PrimitiveKind::sphere;
  sphere.size = Vec3::Constant(0.05);
  sphere.instance_id = 1;
  sphere.category_id = 4;
  synth::TrajectorySpec spec;
  spec.kind = synth::TrajectoryKind::orbit;
  spec.radius = 0.4;
  spec.frames = frames;
  spec.elevation_deg = 15;
  return orbit_frames({sphere}, spec, intr);
}

size_t count_events(const std::vector<objmap::Event>& events, objmap::EventKind kind) {
  size_t n = 0;
  for (const auto& ev : events) n += ev.kind == kind;
  return n;
}

}  // namespace

TEST_CASE("ingest creates objects and stores keyframes on the cadence") {
  Intrinsics intr = small_camera();
  std::vector<Frame> frames = sphere_orbit(3, intr);

  objmap::SceneState scene;
  scene.config = fast_config();

  auto events = objmap::ingest_frame(scene, std::make_shared<Frame>(frames[0]));
  CHECK(count_events(events, objmap::EventKind::object_created) == 1);
  CHECK(count_events(events, objmap::EventKind::keyframe_stored) == 1);  // frame 0 is 0 mod 25
  REQUIRE(scene.objects.count(1) == 1);
  CHECK(scene.objects.at(1).category == 4);
  CHECK_FALSE(scene.objects.at(1).coarse_cloud.empty());

  // frame 1 is not on the keyframe cadence
  events = objmap::ingest_frame(scene, std::make_shared<Frame>(frames[1]));
  CHECK(count_events(events, objmap::EventKind::keyframe_stored) == 0);
  CHECK(scene.objects.at(1).running.size() == 2);

  SUBCASE("frames must arrive in order") {
    CHECK_THROWS_AS(objmap::ingest_frame(scene, std::make_shared<Frame>(frames[0])),
                    std::invalid_argument);
  }
}

TEST_CASE("masks below one hundred valid pixels are ignored") {
  Intrinsics intr = small_camera();
  Frame frame;
  frame.index = 0;
  frame.intrinsics = intr;
  frame.pose = synth::look_at_pose(Vec3(0.4, 0, 0), Vec3::Zero());
  frame.color = ImageF(intr.width, intr.height, 3, 0.5f);
  frame.depth = ImageF(intr.width, intr.height, 1, 0.0f);
  frame.masks = ImageU16(intr.width, intr.height, 1, 0);
  for (int i = 0; i < 99; ++i) {
    frame.masks.at(i % 30, i / 30) = 7;
    frame.depth.at(i % 30, i / 30) = 0.5f;
  }

  objmap::SceneState scene;
  scene.config = fast_config();
  auto events = objmap::ingest_frame(scene, std::make_shared<Frame>(frame));
  CHECK(events.empty());
  CHECK(scene.objects.empty());

  // the hundredth valid pixel crosses the threshold
  frame.index = 1;
  frame.masks.at(20, 20) = 7;
  frame.depth.at(20, 20) = 0.5f;
  events = objmap::ingest_frame(scene, std::make_shared<Frame>(frame));
  CHECK(count_events(events, objmap::EventKind::object_created) == 1);
}

TEST_CASE("keyframe buffer keeps the first frame and evicts FIFO") {
  Intrinsics intr = small_camera();
  std::vector<Frame> frames = sphere_orbit(1, intr);

  objmap::SceneState scene;
  scene.config = fast_config();
  scene.config.keyframe_every = 1;  // every frame becomes a keyframe

  for (long i = 0; i < 25; ++i) {
    Frame f = frames[0];
    f.index = i;
    objmap::ingest_frame(scene, std::make_shared<Frame>(f));
  }
  const objmap::ObjectState& obj = scene.objects.at(1);
  CHECK(obj.keyframes.size() == 20);
  CHECK(count_events(scene.events, objmap::EventKind::keyframe_evicted) == 5);

  // expected contents: the pinned first keyframe plus the 19 most recent
  std::vector<long> kept;
  for (const auto& kf : obj.keyframes) kept.push_back(kf.frame->index);
  std::vector<long> expected = {0};
  for (long i = 6; i < 25; ++i) expected.push_back(i);
  CHECK(kept == expected);
}

TEST_CASE("keyframe selection is uniform and splits slots with a prior") {
  Intrinsics intr = small_camera();
  std::vector<Frame> frames = sphere_orbit(1, intr);
  objmap::SceneState scene;
  scene.config = fast_config();
  scene.config.keyframe_every = 1;
  for (long i = 0; i < 5; ++i) {
    Frame f = frames[0];
    f.index = i;
    objmap::ingest_frame(scene, std::make_shared<Frame>(f));
  }
  objmap::ObjectState& obj = scene.objects.at(1);
  obj.running.clear();  // leave exactly the 5 buffered keyframes
  std::mt19937_64 rng(77);

  SUBCASE("single candidate is always returned") {
    while (obj.keyframes.size() > 1) obj.keyframes.pop_back();
    for (int i = 0; i < 10; ++i) {
      auto sel = objmap::select_keyframes(obj, 1, rng);
      REQUIRE(sel.observed.size() == 1);
      CHECK(sel.observed[0]->frame->index == 0);
    }
  }

  SUBCASE("draw frequencies match the uniform rate") {
    std::map<long, int> counts;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
      auto sel = objmap::select_keyframes(obj, 1, rng);
      counts[sel.observed[0]->frame->index]++;
    }
    double p = 1.0 / 5.0;
    double sigma = std::sqrt(p * (1 - p) / draws);
    for (const auto& [index, count] : counts) {
      (void)index;
      CHECK(std::abs(count / double(draws) - p) < 3 * sigma + 1e-9);
    }
  }

  SUBCASE("an attached prior reserves half the slots for synthesis") {
    library::PriorBinding binding;
    binding.snapshot =
        std::make_shared<field::ObjectModel>(make_sphere_model(Vec3::Zero(), 0.05));
    for (int i = 0; i < 8; ++i)
      binding.stored_poses_world.push_back(
          synth::look_at_pose(Vec3(0.4 * std::cos(i), 0.4 * std::sin(i), 0.1), Vec3::Zero()));
    obj.prior = binding;
    auto sel = objmap::select_keyframes(obj, 6, rng);
    CHECK(sel.observed.size() == 3);
    CHECK(sel.synth_poses.size() == 3);

    obj.prior->synthesize = false;
    sel = objmap::select_keyframes(obj, 6, rng);
    CHECK(sel.synth_poses.empty());
  }

  SUBCASE("no candidates is an error") {
    obj.keyframes.clear();
    obj.running.clear();
    CHECK_THROWS(objmap::select_keyframes(obj, 1, rng));
  }
}

TEST_CASE("box extension remaps the field with small interior drift") {
  objmap::SceneState scene;
  scene.config = fast_config();

  const double radius = 0.05;
  field::ObjectModel model = make_sphere_model(Vec3::Zero(), radius, 0.3, 300);
  BoxTransform old_box = model.box;

  objmap::ObjectState obj;
  obj.id = 1;
  obj.rng = std::mt19937_64(5);
  obj.model = std::move(model);
  synth::Primitive sphere;
  sphere.kind = synth::PrimitiveKind::sphere;
  sphere.size = Vec3::Constant(radius);
  for (const Vec3& v : synth::ground_truth_mesh(sphere, 0.01).vertices)
    obj.coarse_cloud.points.push_back(v);

  SUBCASE("interior points never trigger an extension") {
    PointCloud inside;
    inside.points.emplace_back(0.0, 0.0, 0.0);
    CHECK_FALSE(objmap::maybe_extend_box(scene, obj, inside));
    CHECK(obj.model.box.extent == old_box.extent);
  }

  SUBCASE("an escaped point grows the box and keeps the interior field") {
    std::vector<Vec3> probes;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unit(-0.4, 0.4);
    while (probes.size() < 100) {
      Vec3 w(unit(rng) * old_box.extent.x(), unit(rng) * old_box.extent.y(),
             unit(rng) * old_box.extent.z());
      probes.push_back(w);
    }
    std::vector<double> before;
    for (const Vec3& w : probes) before.push_back(obj.model.decode_occupancy(old_box.to_box(w)));

    PointCloud outside;
    outside.points.emplace_back(old_box.extent.x() * 0.51 + 0.02, 0, 0);
    obj.coarse_cloud.points.push_back(outside.points[0]);
    REQUIRE(objmap::maybe_extend_box(scene, obj, outside));
    CHECK(obj.model.box.contains(outside.points[0]));
    CHECK(obj.extension_count == 1);

    double worst = 0;
    for (size_t i = 0; i < probes.size(); ++i) {
      double after = obj.model.decode_occupancy(obj.model.box.to_box(probes[i]));
      worst = std::max(worst, std::abs(after - before[i]));
    }
    CHECK(worst < 0.05);

    // grid moments restart, MLP moments persist
    auto infos = field::tensor_infos(obj.model);
    for (size_t t = 0; t < infos.size(); ++t)
      if (infos[t].is_grid) CHECK(obj.model.opt.steps[t] == 0);
  }
}

TEST_CASE("box never shrinks during a session") {
  Intrinsics intr = small_camera(120, 90, 110);
  std::vector<Frame> frames = sphere_orbit(12, intr);

  objmap::SceneState scene;
  scene.config = fast_config();
  scene.config.steps_per_frame = 0;  // geometry bookkeeping only

  Vec3 prev_lo, prev_hi;
  bool first = true;
  for (const Frame& f : frames) {
    objmap::ingest_frame(scene, std::make_shared<Frame>(f));
    const auto& box = scene.objects.at(1).model.box;
    Vec3 lo = box.center - box.extent * 0.5;
    Vec3 hi = box.center + box.extent * 0.5;
    if (!first) {
      for (int a = 0; a < 3; ++a) {
        CHECK(lo[a] <= prev_lo[a] + 1e-9);
        CHECK(hi[a] >= prev_hi[a] - 1e-9);
      }
    }
    prev_lo = lo;
    prev_hi = hi;
    first = false;
  }
}

TEST_CASE("replay determinism across runs and thread counts") {
  Intrinsics intr = small_camera(120, 90, 110);

  synth::Primitive sphere;
  sphere.kind = synth::PrimitiveKind::sphere;
  sphere.size = Vec3::Constant(0.05);
  sphere.instance_id = 1;
  synth::Primitive box;
  box.kind = synth::PrimitiveKind::box;
  box.size = Vec3(0.06, 0.05, 0.08);
  box.pose.translation = Vec3(0, 0.12, 0);
  box.instance_id = 2;
  synth::TrajectorySpec spec;
  spec.kind = synth::TrajectoryKind::orbit;
  spec.radius = 0.45;
  spec.frames = 12;
  spec.elevation_deg = 20;
  spec.look_at = Vec3(0, 0.06, 0);
  spec.center = Vec3(0, 0.06, 0);
  std::vector<Frame> frames = orbit_frames({sphere, box}, spec, intr);

  auto run = [&](int threads) {
    objmap::SceneState scene;
    scene.config = fast_config();
    scene.seed = 7;
    objmap::run_sequence(scene, frame_stream(frames), nullptr, {}, threads);
    return scene;
  };

  objmap::SceneState a = run(1);
  objmap::SceneState b = run(1);
  objmap::SceneState c = run(2);

  auto event_log = [](const objmap::SceneState& s) {
    std::string log;
    for (const auto& ev : s.events) log += objmap::to_json_line(ev) + "\n";
    return log;
  };
  CHECK(event_log(a) == event_log(b));
  CHECK(event_log(a) == event_log(c));

  for (const auto& [id, obj] : a.objects) {
    CHECK(obj.loss_history == b.objects.at(id).loss_history);
    CHECK(obj.loss_history == c.objects.at(id).loss_history);
    CHECK(obj.model.geo_grid.levels == b.objects.at(id).model.geo_grid.levels);
    CHECK(obj.model.geo_grid.levels == c.objects.at(id).model.geo_grid.levels);
  }
}
