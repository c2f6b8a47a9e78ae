#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "objrecon/mesh/culling.hpp"
#include "objrecon/mesh/marching_cubes.hpp"
#include "objrecon/mesh/metrics.hpp"
#include "objrecon/mesh/ply.hpp"
#include "objrecon/synth/gt_mesh.hpp"
#include "test_helpers.hpp"

using namespace objrecon;

namespace {

std::vector<double> logistic_sphere_lattice(int n, double spacing, const Vec3& origin,
                                            const Vec3& center, double radius, double k) {
  std::vector<double> values(static_cast<size_t>(n) * n * n);
  size_t i = 0;
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x, ++i) {
        Vec3 p = origin + spacing * Vec3(x, y, z);
        values[i] = 1.0 / (1.0 + std::exp(-k * (radius - (p - center).norm())));
      }
  return values;
}

}  // namespace

TEST_CASE("marching cubes recovers an analytic iso-sphere") {
  const double radius = 0.05, spacing = 0.004;
  const int n = 32;
  Vec3 origin = Vec3::Constant(-spacing * (n - 1) / 2.0);
  std::vector<double> values = logistic_sphere_lattice(n, spacing, origin, Vec3::Zero(), radius, 400);

  mesh::TriangleMesh m = mesh::marching_cubes(values, n, n, n, origin, spacing, 0.5);
  REQUIRE(m.vertices.size() > 300);
  for (const Vec3& v : m.vertices) CHECK(std::abs(v.norm() - radius) < spacing / 2);
  CHECK(m.boundary_edge_count() == 0);  // watertight on a closed field
  for (const auto& t : m.triangles) {
    CHECK(t[0] != t[1]);
    CHECK(t[1] != t[2]);
    CHECK(t[2] != t[0]);
  }
}

TEST_CASE("extract_mesh on a constructed model") {
  SUBCASE("constant sub-threshold occupancy gives an empty mesh") {
    std::mt19937_64 rng(2);
    BoxTransform box;
    box.extent = Vec3::Constant(0.2);
    field::ObjectModel model = field::ObjectModel::create({}, box, rng);
    for (auto* t : field::tensor_ptrs(model)) std::fill(t->begin(), t->end(), 0.0);
    model.geo_mlp.biases.back()[0] = std::log(0.4 / 0.6);  // occupancy 0.4 everywhere
    mesh::TriangleMesh m = mesh::extract_mesh(model, 0.01);
    CHECK(m.empty());
  }

  SUBCASE("sdf-backed sphere model yields a sphere mesh with colors") {
    const double radius = 0.05;
    field::ObjectModel model =
        testutil::make_sphere_model(Vec3(0.4, -0.2, 0.1), radius, 0.2, 400, Vec3(0.9, 0.1, 0.1));
    mesh::TriangleMesh m = mesh::extract_mesh(model, 0.005, true);
    REQUIRE(m.vertices.size() > 300);
    double worst = 0;
    for (const Vec3& v : m.vertices)
      worst = std::max(worst, std::abs((v - Vec3(0.4, -0.2, 0.1)).norm() - radius));
    CHECK(worst < 0.005);  // within one cell of the analytic radius
    REQUIRE(m.has_colors());
    for (const Vec3& c : m.colors) {
      CHECK(c.x() == doctest::Approx(0.9).epsilon(1e-6));
      CHECK(c.y() == doctest::Approx(0.1).epsilon(1e-6));
    }
  }
}

TEST_CASE("culling removes never-seen vertices") {
  synth::Primitive sphere;
  sphere.kind = synth::PrimitiveKind::sphere;
  sphere.size = Vec3::Constant(0.05);
  sphere.instance_id = 1;
  mesh::TriangleMesh gt = synth::ground_truth_mesh(sphere, 0.006);
  Intrinsics intr = testutil::small_camera();

  SUBCASE("full orbit keeps the whole mesh") {
    synth::TrajectorySpec spec;
    spec.kind = synth::TrajectoryKind::hemisphere;
    spec.radius = 0.4;
    spec.frames = 24;
    spec.elevation_deg = -60;
    spec.elevation_max_deg = 60;
    spec.cycles = 3;
    std::vector<Frame> frames = testutil::orbit_frames({sphere}, spec, intr);
    mesh::TriangleMesh culled = mesh::cull_unseen(gt, frames, 0.02);
    CHECK(culled.vertices.size() == gt.vertices.size());
  }

  SUBCASE("a single front view drops the back hemisphere") {
    Pose cam = synth::look_at_pose(Vec3(0.4, 0, 0), Vec3::Zero());
    std::vector<Frame> frames = {synth::raycast_frame({sphere}, cam, intr)};
    mesh::TriangleMesh culled = mesh::cull_unseen(gt, frames, 0.005);
    CHECK(culled.vertices.size() < gt.vertices.size() * 0.7);
    for (const Vec3& v : culled.vertices) CHECK(v.x() > -0.01);  // camera side survives
  }
}

TEST_CASE("accuracy, completion and completion ratio") {
  synth::Primitive sphere;
  sphere.kind = synth::PrimitiveKind::sphere;
  sphere.size = Vec3::Constant(0.08);
  mesh::TriangleMesh gt = synth::ground_truth_mesh(sphere, 0.004);

  SUBCASE("identical meshes score perfectly") {
    CHECK(mesh::accuracy_cm(gt, gt) == 0.0);
    CHECK(mesh::completion_cm(gt, gt) == 0.0);
    CHECK(mesh::completion_ratio(gt, gt, 0.01) == 100.0);
  }

  SUBCASE("a plane shifted 1cm along its normal scores exactly 1cm") {
    mesh::TriangleMesh plane;
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 40; ++x) plane.vertices.emplace_back(0.004 * x, 0.004 * y, 0.0);
    plane.triangles.push_back({0, 1, 41});
    mesh::TriangleMesh moved = plane;
    moved.transform(Mat3::Identity(), Vec3(0, 0, 0.01));
    // the nearest neighbor of every shifted vertex is its own original
    CHECK(mesh::accuracy_cm(moved, plane) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mesh::completion_cm(moved, plane) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("constructed half coverage gives a 50 percent ratio") {
    mesh::TriangleMesh reconstructed;
    mesh::TriangleMesh target;
    for (int i = 0; i < 500; ++i) {
      Vec3 a(0.001 * i, 0, 0);         // cluster A, covered exactly
      Vec3 b(10 + 0.001 * i, 0, 0);    // cluster B, missed by 5cm
      target.vertices.push_back(a);
      target.vertices.push_back(b);
      reconstructed.vertices.push_back(a);
      reconstructed.vertices.push_back(b + Vec3(0, 0.05, 0));
    }
    target.triangles.push_back({0, 1, 2});
    reconstructed.triangles.push_back({0, 1, 2});
    CHECK(mesh::completion_ratio(reconstructed, target, 0.01) == doctest::Approx(50.0));
  }

  SUBCASE("metrics scale linearly with the geometry") {
    mesh::TriangleMesh moved = gt;
    moved.transform(Mat3::Identity(), Vec3(0.004, 0.002, 0.001));
    double acc1 = mesh::accuracy_cm(moved, gt);
    auto scale_mesh = [](mesh::TriangleMesh m, double c) {
      for (Vec3& v : m.vertices) v *= c;
      return m;
    };
    double acc2 = mesh::accuracy_cm(scale_mesh(moved, 2.0), scale_mesh(gt, 2.0));
    CHECK(acc2 == doctest::Approx(2.0 * acc1).epsilon(1e-9));
  }
}

TEST_CASE("metric symmetry pair over random point sets") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    mesh::TriangleMesh a, b;
    int na = 3 + trial % 20, nb = 3 + (trial * 7) % 20;
    for (int i = 0; i < na; ++i) a.vertices.emplace_back(unit(rng), unit(rng), unit(rng));
    for (int i = 0; i < nb; ++i) b.vertices.emplace_back(unit(rng), unit(rng), unit(rng));
    CHECK(mesh::accuracy_cm(a, b) == mesh::completion_cm(b, a));
  }
}

TEST_CASE("ply round trip in both formats") {
  synth::Primitive box;
  box.kind = synth::PrimitiveKind::box;
  box.size = Vec3(0.05, 0.07, 0.03);
  mesh::TriangleMesh m = synth::ground_truth_mesh(box, 0.01);
  m.colors.resize(m.vertices.size());
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Vec3& c : m.colors) c = Vec3(unit(rng), unit(rng), unit(rng));

  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "objrecon_ply_test";
  fs::create_directories(dir);

  for (bool binary : {true, false}) {
    std::string path = (dir / (binary ? "bin.ply" : "ascii.ply")).string();
    mesh::write_ply(m, path, binary);
    mesh::TriangleMesh back = mesh::read_ply(path);
    REQUIRE(back.vertices.size() == m.vertices.size());
    REQUIRE(back.triangles.size() == m.triangles.size());
    for (size_t i = 0; i < m.vertices.size(); ++i) {
      CHECK((back.vertices[i] - m.vertices[i]).norm() < 1e-6);
      CHECK((back.colors[i] - m.colors[i]).cwiseAbs().maxCoeff() < 1.0 / 255.0 + 1e-9);
    }
    CHECK(back.triangles == m.triangles);
  }
  fs::remove_all(dir);
}
