#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <tuple>

#include "objrecon/core/depth_filter.hpp"
#include "objrecon/core/kdtree.hpp"
#include "objrecon/core/ops.hpp"
#include "test_helpers.hpp"

using namespace objrecon;

namespace {

Frame blank_frame(const Intrinsics& intr) {
  Frame frame;
  frame.intrinsics = intr;
  frame.color = ImageF(intr.width, intr.height, 3, 0.0f);
  frame.depth = ImageF(intr.width, intr.height, 1, 0.0f);
  frame.masks = ImageU16(intr.width, intr.height, 1, 0);
  return frame;
}

}  // namespace

TEST_CASE("backproject principal ray and pinhole offsets") {
  Intrinsics intr = testutil::small_camera(200, 160, 60);
  Frame frame = blank_frame(intr);
  int cx = static_cast<int>(intr.cx), cy = static_cast<int>(intr.cy);
  frame.masks.at(cx, cy) = 1;
  frame.depth.at(cx, cy) = 2.0f;

  PointCloud cloud = backproject(frame, 1);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud.points[0].isApprox(Vec3(0, 0, 2), 1e-9));

  // one focal length to the right of the principal point: x = d
  frame.masks.at(cx, cy) = 0;
  int px = cx + static_cast<int>(intr.fx);
  frame.masks.at(px, cy) = 1;
  frame.depth.at(px, cy) = 1.5f;
  cloud = backproject(frame, 1);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud.points[0].isApprox(Vec3(1.5, 0, 1.5), 1e-6));
}

TEST_CASE("backproject skips invalid depth and rejects unknown instances") {
  Intrinsics intr = testutil::small_camera();
  Frame frame = blank_frame(intr);
  frame.masks.at(3, 4) = 2;
  frame.masks.at(5, 4) = 2;  // depths stay 0
  CHECK(backproject(frame, 2).empty());
  CHECK_THROWS_AS(backproject(frame, 9), std::invalid_argument);
}

TEST_CASE("project then backproject is the identity") {
  Intrinsics intr = testutil::small_camera(320, 240, 250);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    Pose pose = synth::look_at_pose(Vec3(unit(rng), unit(rng), unit(rng)) * 0.5 + Vec3(2, 0, 0),
                                    Vec3(unit(rng), unit(rng), unit(rng)) * 0.1);
    Vec3 p(unit(rng) * 0.3, unit(rng) * 0.3, unit(rng) * 0.3);
    PixelProjection proj = project_point(p, pose, intr);
    if (!proj.in_front || proj.depth < 0.1) continue;
    Vec3 back = backproject_pixel(proj.u, proj.v, proj.depth, pose, intr);
    CHECK((back - p).norm() < 1e-9);
    PixelProjection again = project_point(back, pose, intr);
    CHECK(std::abs(again.u - proj.u) < 0.5);
    CHECK(std::abs(again.depth - proj.depth) < 1e-6);
  }
}

TEST_CASE("box coordinates map center and corner as documented") {
  BoxTransform box;
  box.center = Vec3(1, 2, 3);
  box.extent = Vec3(0.4, 0.6, 0.8);
  CHECK(box.to_box(box.center).isApprox(Vec3(0.5, 0.5, 0.5), 1e-12));
  CHECK(box.to_box(box.center + box.extent * 0.5).isApprox(Vec3(1, 1, 1), 1e-12));
}

TEST_CASE("box coordinate round trip is identity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  for (int i = 0; i < 1000; ++i) {
    BoxTransform box;
    box.center = Vec3(unit(rng), unit(rng), unit(rng));
    box.extent = Vec3(0.1 + std::abs(unit(rng)), 0.1 + std::abs(unit(rng)),
                      0.1 + std::abs(unit(rng)));
    box.rotation = Eigen::AngleAxisd(angle(rng), Vec3(unit(rng), unit(rng), unit(rng)).normalized())
                       .toRotationMatrix();
    Vec3 p(unit(rng), unit(rng), unit(rng));
    CHECK((box.from_box(box.to_box(p)) - p).norm() < 1e-9);
  }
}

TEST_CASE("update_bounding_box adds the margin around the tight box") {
  PointCloud corners;
  for (int c = 0; c < 8; ++c)
    corners.points.emplace_back(c & 1 ? 1.0 : 0.0, c & 2 ? 1.0 : 0.0, c & 4 ? 1.0 : 0.0);

  BoxTransform box = update_bounding_box(corners, 0.1);
  CHECK(box.extent.isApprox(Vec3(1.1, 1.1, 1.1), 1e-12));
  CHECK(box.center.isApprox(Vec3(0.5, 0.5, 0.5), 1e-12));

  BoxTransform tight = update_bounding_box(corners, 0.0);
  CHECK(tight.extent.isApprox(Vec3(1, 1, 1), 1e-12));

  PointCloud single;
  single.points.emplace_back(3, 3, 3);
  BoxTransform degenerate = update_bounding_box(single, 0.1);
  CHECK(degenerate.extent.minCoeff() == doctest::Approx(0.02));

  CHECK_THROWS_AS(update_bounding_box(PointCloud{}, 0.1), std::invalid_argument);
}

TEST_CASE("bounding box is monotone under point insertion") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    PointCloud subset;
    for (int i = 0; i < 20; ++i)
      subset.points.emplace_back(unit(rng), unit(rng), unit(rng));
    PointCloud superset = subset;
    for (int i = 0; i < 10; ++i)
      superset.points.emplace_back(unit(rng) * 2, unit(rng) * 2, unit(rng) * 2);

    BoxTransform small = update_bounding_box(subset, 0.1);
    BoxTransform big = update_bounding_box(superset, 0.1);
    Vec3 lo_small = small.center - small.extent * 0.5;
    Vec3 hi_small = small.center + small.extent * 0.5;
    Vec3 lo_big = big.center - big.extent * 0.5;
    Vec3 hi_big = big.center + big.extent * 0.5;
    for (int a = 0; a < 3; ++a) {
      CHECK(lo_big[a] <= lo_small[a] + 1e-12);
      CHECK(hi_big[a] >= hi_small[a] - 1e-12);
    }
  }
}

TEST_CASE("depth filter band and histogram behavior") {
  Intrinsics intr = testutil::small_camera();
  Frame frame = blank_frame(intr);

  SUBCASE("uniform depths pass through") {
    for (int i = 0; i < 50; ++i) {
      frame.masks.at(i, 0) = 1;
      frame.depth.at(i, 0) = 1.25f;
    }
    Frame out = filter_depth_outliers(frame, 1, {});
    CHECK(out.depth.data == frame.depth.data);
  }

  SUBCASE("single far outlier is zeroed at alpha 1.5") {
    for (int i = 0; i < 99; ++i) {
      frame.masks.at(i % intr.width, i / intr.width) = 1;
      frame.depth.at(i % intr.width, i / intr.width) = 1.0f;
    }
    frame.masks.at(99, 1) = 1;
    frame.depth.at(99, 1) = 5.0f;
    DepthFilterConfig cfg;
    CHECK(cfg.alpha == doctest::Approx(1.5));
    Frame out = filter_depth_outliers(frame, 1, cfg);
    CHECK(out.depth.at(99, 1) == 0.0f);
    CHECK(out.depth.at(0, 0) == 1.0f);
  }

  SUBCASE("never increases the number of valid depths") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> d(0.0f, 6.0f);
    for (int trial = 0; trial < 50; ++trial) {
      Frame f = blank_frame(intr);
      int before = 0;
      for (int i = 0; i < 400; ++i) {
        int x = i % intr.width, y = i / intr.width;
        f.masks.at(x, y) = 1;
        float depth = d(rng);
        f.depth.at(x, y) = depth;
        before += depth > 0;
      }
      Frame out = filter_depth_outliers(f, 1, {});
      int after = 0;
      for (float v : out.depth.data) after += v > 0;
      CHECK(after <= before);
    }
  }
}

TEST_CASE("voxel downsample centroids and idempotence") {
  PointCloud cloud;
  cloud.points.emplace_back(0.001, 0.001, 0.001);
  cloud.points.emplace_back(0.003, 0.003, 0.003);
  PointCloud down = voxel_downsample(cloud, 0.01);
  REQUIRE(down.size() == 1);
  CHECK(down.points[0].isApprox(Vec3(0.002, 0.002, 0.002), 1e-12));

  PointCloud far_apart;
  far_apart.points.emplace_back(0, 0, 0);
  far_apart.points.emplace_back(1, 1, 1);
  CHECK(voxel_downsample(far_apart, 0.01).size() == 2);

  PointCloud again = voxel_downsample(down, 0.01);
  CHECK(again.points[0].isApprox(down.points[0], 1e-12));
}

TEST_CASE("voxel downsample matches a brute-force bucket oracle") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  PointCloud cloud;
  for (int i = 0; i < 10000; ++i)
    cloud.points.emplace_back(unit(rng), unit(rng), unit(rng));
  const double voxel = 0.01;

  struct Bucket {
    Vec3 sum = Vec3::Zero();
    int count = 0;
  };
  std::map<std::tuple<long, long, long>, Bucket> buckets;
  for (const Vec3& p : cloud.points) {
    auto key = std::make_tuple(static_cast<long>(std::floor(p.x() / voxel)),
                               static_cast<long>(std::floor(p.y() / voxel)),
                               static_cast<long>(std::floor(p.z() / voxel)));
    Bucket& b = buckets[key];
    b.sum += p;
    b.count++;
  }

  PointCloud down = voxel_downsample(cloud, voxel);
  REQUIRE(down.size() == buckets.size());
  size_t i = 0;
  for (const auto& [key, bucket] : buckets) {
    (void)key;
    CHECK((down.points[i] - bucket.sum / bucket.count).norm() < 1e-12);
    i++;
  }
}

TEST_CASE("kdtree agrees with brute force") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vec3> points;
  for (int i = 0; i < 700; ++i) points.emplace_back(unit(rng), unit(rng), unit(rng));
  KdTree3 tree(points);

  for (int q = 0; q < 100; ++q) {
    Vec3 query(unit(rng), unit(rng), unit(rng));
    int best = -1;
    double best_d = 1e18;
    for (size_t i = 0; i < points.size(); ++i) {
      double d = (points[i] - query).norm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    auto nn = tree.nearest(query);
    CHECK(nn.index == best);
    CHECK(nn.distance == doctest::Approx(best_d));

    auto within = tree.radius_search(query, 0.25);
    size_t brute = 0;
    for (const Vec3& p : points) brute += (p - query).norm() <= 0.25;
    CHECK(within.size() == brute);

    auto knn = tree.knn(query, 5);
    REQUIRE(knn.size() == 5);
    CHECK(knn[0] == best);
    for (size_t i = 1; i < knn.size(); ++i)
      CHECK((points[knn[i - 1]] - query).norm() <= (points[knn[i]] - query).norm() + 1e-12);
  }
}
