#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "objrecon/io/archive.hpp"
#include "objrecon/io/config.hpp"
#include "objrecon/io/dataset.hpp"
#include "objrecon/io/png_io.hpp"
#include "test_helpers.hpp"

using namespace objrecon;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char* name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

field::ObjectModel random_float_model(uint64_t seed) {
  // all values drawn as float32 so they survive the archive exactly
  std::mt19937_64 rng(seed);
  BoxTransform box;
  box.center = Vec3(0.25, -0.5, 1.0);
  box.extent = Vec3(0.25, 0.5, 0.125);
  field::ObjectModel model = field::ObjectModel::create({2, 4, 1.5}, box, rng);
  std::uniform_real_distribution<float> f(-2.0f, 2.0f);
  for (auto* t : field::tensor_ptrs(model))
    for (double& v : *t) v = f(rng);
  for (size_t t = 0; t < model.opt.m.size(); ++t) {
    for (double& v : model.opt.m[t]) v = f(rng);
    for (double& v : model.opt.v[t]) v = std::abs(f(rng));
    model.opt.steps[t] = static_cast<long>(rng() % 100);
  }
  return model;
}

}  // namespace

TEST_CASE("png round trips are exact") {
  fs::path dir = scratch_dir("objrecon_png_test");
  std::mt19937_64 rng(2);

  Image<uint8_t> rgb(37, 23, 3);
  for (auto& v : rgb.data) v = static_cast<uint8_t>(rng());
  io::write_png_rgb8((dir / "c.png").string(), rgb);
  Image<uint8_t> rgb_back = io::read_png_rgb8((dir / "c.png").string());
  CHECK(rgb_back.width == 37);
  CHECK(rgb_back.height == 23);
  CHECK(rgb_back.data == rgb.data);

  Image<uint16_t> gray(41, 19, 1);
  for (auto& v : gray.data) v = static_cast<uint16_t>(rng());
  io::write_png_gray16((dir / "d.png").string(), gray);
  Image<uint16_t> gray_back = io::read_png_gray16((dir / "d.png").string());
  CHECK(gray_back.data == gray.data);

  CHECK_THROWS(io::read_png_rgb8((dir / "missing.png").string()));
  fs::remove_all(dir);
}

TEST_CASE("dataset writes and loads frames faithfully") {
  fs::path dir = scratch_dir("objrecon_dataset_test");
  Intrinsics intr = testutil::small_camera(64, 48, 60);

  synth::Primitive sphere;
  sphere.kind = synth::PrimitiveKind::sphere;
  sphere.size = Vec3::Constant(0.05);
  sphere.instance_id = 3;
  sphere.category_id = 9;

  std::vector<Pose> poses;
  std::vector<long> indices;
  std::vector<Frame> originals;
  for (long i = 0; i < 3; ++i) {
    Pose pose = synth::look_at_pose(Vec3(0.4, 0.05 * i, 0.1), Vec3::Zero());
    Frame frame = synth::raycast_frame({sphere}, pose, intr, i);
    io::write_frame(dir.string(), frame);
    poses.push_back(pose);
    indices.push_back(i);
    originals.push_back(std::move(frame));
  }
  io::write_intrinsics(dir.string(), intr);
  io::write_poses(dir.string(), indices, poses);
  io::write_categories(dir.string(), {{3, 9}});

  io::Dataset dataset(dir.string());
  REQUIRE(dataset.size() == 3);
  CHECK(dataset.intrinsics().fx == intr.fx);

  for (size_t i = 0; i < dataset.size(); ++i) {
    Frame loaded = dataset.load(i);
    const Frame& orig = originals[i];
    CHECK(loaded.index == orig.index);
    CHECK(loaded.masks.data == orig.masks.data);
    CHECK(loaded.categories.at(3) == 9);
    CHECK((loaded.pose.translation - orig.pose.translation).norm() < 1e-12);
    double max_color = 0, max_depth = 0;
    for (size_t p = 0; p < orig.color.data.size(); ++p)
      max_color = std::max<double>(max_color, std::abs(loaded.color.data[p] - orig.color.data[p]));
    for (size_t p = 0; p < orig.depth.data.size(); ++p)
      max_depth = std::max<double>(max_depth, std::abs(loaded.depth.data[p] - orig.depth.data[p]));
    CHECK(max_color <= 0.5 / 255.0 + 1e-6);
    CHECK(max_depth <= 0.5 / intr.depth_scale + 1e-9);
  }

  SUBCASE("missing files are named in errors") {
    fs::remove(dir / "frame_000001.depth.png");
    CHECK_THROWS_WITH_AS(io::Dataset(dir.string()),
                         doctest::Contains("frame_000001.depth.png"), std::runtime_error);
  }
  fs::remove_all(dir);
}

TEST_CASE("model archive round trips") {
  fs::path dir = scratch_dir("objrecon_archive_test");

  SUBCASE("float32-valued models reload bit-identically") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
      field::ObjectModel model = random_float_model(seed);
      std::string path = (dir / "m.model").string();
      io::save_model(model, path);
      field::ObjectModel loaded = io::load_model(path);

      auto a = field::tensor_ptrs(model);
      auto b = field::tensor_ptrs(loaded);
      REQUIRE(a.size() == b.size());
      for (size_t t = 0; t < a.size(); ++t) CHECK(*a[t] == *b[t]);
      CHECK(loaded.opt.steps == model.opt.steps);
      for (size_t t = 0; t < a.size(); ++t) {
        CHECK(loaded.opt.m[t] == model.opt.m[t]);
        CHECK(loaded.opt.v[t] == model.opt.v[t]);
      }
      CHECK(loaded.box.center.isApprox(model.box.center, 0.0));
      CHECK(loaded.box.extent.isApprox(model.box.extent, 0.0));
    }
  }

  SUBCASE("save-load-save produces identical bytes even off the float grid") {
    field::ObjectModel model = random_float_model(11);
    model.geo_grid.levels[0][5] = 1.0 / 3.0;  // not float32-representable
    model.frozen_col_mlp = true;
    std::ostringstream first;
    io::save_model(model, first);
    std::istringstream reread(first.str());
    field::ObjectModel loaded = io::load_model(reread);
    std::ostringstream second;
    io::save_model(loaded, second);
    CHECK(first.str() == second.str());
    CHECK(loaded.frozen_col_mlp);
  }

  SUBCASE("truncated archives fail loudly") {
    field::ObjectModel model = random_float_model(3);
    std::ostringstream out;
    io::save_model(model, out);
    std::string bytes = out.str();
    std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(io::load_model(truncated), std::runtime_error);
  }
  fs::remove_all(dir);
}

TEST_CASE("config defaults carry the shipping values") {
  io::RunConfig cfg = io::parse_config("{}");

  CHECK(cfg.mapper.grid.levels == 3);
  CHECK(cfg.mapper.grid.n0 == 16);
  CHECK(cfg.mapper.grid.gamma == 1.5);

  CHECK(cfg.mapper.total_rays == 9600);
  CHECK(cfg.mapper.keyframes_per_step == 6);
  CHECK(cfg.mapper.rays.n_total == 14);
  CHECK(cfg.mapper.rays.n_surface == 13);
  CHECK(cfg.mapper.rays.n_synth == 24);
  CHECK(3.0 * cfg.mapper.rays.sigma == doctest::Approx(0.05).epsilon(1e-15));

  CHECK(cfg.mapper.losses.lambda_color == 5.0);
  CHECK(cfg.mapper.losses.lambda_mask == 10.0);

  CHECK(cfg.mapper.optim.lr_grid == 5e-3);
  CHECK(cfg.mapper.optim.lr_mlp == 3.5e-4);
  CHECK(cfg.mapper.optim.weight_decay == 0.1);

  CHECK(cfg.mapper.keyframe_every == 25);
  CHECK(cfg.mapper.keyframe_buffer == 20);
  CHECK(cfg.mapper.min_mask_pixels == 100);
  CHECK(cfg.mapper.box_margin == 0.10);
  CHECK(cfg.mapper.steps_per_frame == 3);

  CHECK(cfg.library.top_m == 3);
  CHECK(cfg.library.similarity_threshold == 0.7);
  CHECK(cfg.library.fitness_threshold == 0.8);
  CHECK(cfg.library.reproj_in_mask == 0.90);
  CHECK(cfg.library.depth_tolerance_m == 0.02);

  CHECK(cfg.mesh_resolution_m == 0.005);
  CHECK(cfg.cull_tau_m == 0.02);

  CHECK(cfg.mapper.depth_filter.alpha == 1.5);
  CHECK(cfg.mapper.depth_filter_enabled == false);
}

TEST_CASE("config parsing is strict") {
  SUBCASE("unknown top-level keys are rejected by name") {
    CHECK_THROWS_WITH_AS(io::parse_config(R"({"spurious": 1})"),
                         doctest::Contains("spurious"), std::runtime_error);
  }
  SUBCASE("unknown nested keys are rejected with their scope") {
    CHECK_THROWS_WITH_AS(io::parse_config(R"({"rays": {"bogus": 3}})"),
                         doctest::Contains("rays.bogus"), std::runtime_error);
  }
  SUBCASE("wrong types are rejected by key") {
    CHECK_THROWS_WITH_AS(io::parse_config(R"({"grid": {"n0": "many"}})"),
                         doctest::Contains("n0"), std::runtime_error);
  }
  SUBCASE("invalid values fail validation") {
    CHECK_THROWS(io::parse_config(R"({"grid": {"n0": 1}})"));
    CHECK_THROWS(io::parse_config(R"({"rays": {"surface": 14}})"));
  }
  SUBCASE("overrides apply and round trip through json") {
    io::RunConfig cfg = io::parse_config(R"({"rays": {"total": 512}, "seed": 9,
                                             "objmap": {"grid_update": "reinitialize"}})");
    CHECK(cfg.mapper.total_rays == 512);
    CHECK(cfg.seed == 9);
    CHECK(cfg.mapper.grid_update == objmap::GridUpdateMode::reinitialize);
    io::RunConfig back = io::parse_config(io::config_to_json(cfg));
    CHECK(back.mapper.total_rays == 512);
    CHECK(back.mapper.grid_update == objmap::GridUpdateMode::reinitialize);
    CHECK(io::config_to_json(back) == io::config_to_json(cfg));
  }
}
