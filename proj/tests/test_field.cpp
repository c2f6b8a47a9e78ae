#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "objrecon/render/losses.hpp"
#include "objrecon/render/train.hpp"
#include "test_helpers.hpp"

using namespace objrecon;

namespace {

// Independent re-implementation of the forward pass used as an oracle.
double naive_interpolate(const field::FeatureGrid& grid, int level, Vec3 x) {
  int side = grid.config.level_side(level);
  for (int a = 0; a < 3; ++a) x[a] = std::clamp(x[a], 0.0, 1.0);
  double fx = x.x() * (side - 1), fy = x.y() * (side - 1), fz = x.z() * (side - 1);
  int ix = std::min(static_cast<int>(fx), side - 2);
  int iy = std::min(static_cast<int>(fy), side - 2);
  int iz = std::min(static_cast<int>(fz), side - 2);
  double tx = fx - ix, ty = fy - iy, tz = fz - iz;
  auto v = [&](int dx, int dy, int dz) {
    return grid.levels[level][(iz + dz) * side * side + (iy + dy) * side + (ix + dx)];
  };
  double c00 = v(0, 0, 0) * (1 - tx) + v(1, 0, 0) * tx;
  double c10 = v(0, 1, 0) * (1 - tx) + v(1, 1, 0) * tx;
  double c01 = v(0, 0, 1) * (1 - tx) + v(1, 0, 1) * tx;
  double c11 = v(0, 1, 1) * (1 - tx) + v(1, 1, 1) * tx;
  return (c00 * (1 - ty) + c10 * ty) * (1 - tz) + (c01 * (1 - ty) + c11 * ty) * tz;
}

std::vector<double> naive_mlp(const field::TinyMlp& mlp, std::vector<double> x,
                              std::vector<double>* pre_activations = nullptr) {
  for (int l = 0; l < mlp.layer_count(); ++l) {
    int in = mlp.sizes[l], out = mlp.sizes[l + 1];
    std::vector<double> y(out);
    for (int o = 0; o < out; ++o) {
      double acc = mlp.biases[l][o];
      for (int i = 0; i < in; ++i) acc += mlp.weights[l][o * in + i] * x[i];
      y[o] = acc;
      if (pre_activations) pre_activations->push_back(acc);
    }
    if (l + 1 < mlp.layer_count())
      for (double& v : y) v = std::max(v, 0.0);
    x = std::move(y);
  }
  return x;
}

double naive_occupancy(const field::ObjectModel& model, const Vec3& q) {
  std::vector<double> embed(model.geo_grid.config.levels);
  for (int l = 0; l < model.geo_grid.config.levels; ++l)
    embed[l] = naive_interpolate(model.geo_grid, l, q);
  return field::logistic(naive_mlp(model.geo_mlp, embed)[0]);
}

field::ObjectModel random_model(uint64_t seed, const field::GridConfig& cfg = {4, 4, 1.5}) {
  std::mt19937_64 rng(seed);
  BoxTransform box;
  box.extent = Vec3(0.3, 0.3, 0.3);
  field::ObjectModel model = field::ObjectModel::create(cfg, box, rng);
  // make the grids informative rather than near-zero
  std::uniform_real_distribution<double> f(-0.5, 0.5);
  for (auto& level : model.geo_grid.levels)
    for (double& v : level) v = f(rng);
  for (auto& level : model.col_grid.levels)
    for (double& v : level) v = f(rng);
  return model;
}

}  // namespace

TEST_CASE("grid sizes and parameter count at defaults") {
  field::GridConfig cfg;
  CHECK(cfg.level_side(0) == 16);
  CHECK(cfg.level_side(1) == 24);
  CHECK(cfg.level_side(2) == 36);
  std::mt19937_64 rng(1);
  field::FeatureGrid grid = field::FeatureGrid::create(cfg, rng);
  CHECK(grid.parameter_count() == 64576);
}

TEST_CASE("encode at vertices, constants, and cell centers") {
  field::GridConfig cfg{2, 4, 1.5};
  std::mt19937_64 rng(2);
  field::FeatureGrid grid = field::FeatureGrid::create(cfg, rng);

  SUBCASE("vertex query returns the stored scalar") {
    int side = cfg.level_side(0);
    grid.levels[0][2 * side * side + 1 * side + 3] = 0.77;
    Vec3 q(3.0 / (side - 1), 1.0 / (side - 1), 2.0 / (side - 1));
    CHECK(grid.interpolate_level(0, q) == doctest::Approx(0.77).epsilon(1e-12));
  }

  SUBCASE("constant grid encodes the constant everywhere") {
    for (auto& level : grid.levels)
      for (double& v : level) v = 0.25;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double out[2];
    for (int i = 0; i < 50; ++i) {
      grid.encode(Vec3(unit(rng), unit(rng), unit(rng)), out);
      CHECK(out[0] == doctest::Approx(0.25).epsilon(1e-12));
      CHECK(out[1] == doctest::Approx(0.25).epsilon(1e-12));
    }
  }

  SUBCASE("single hot corner gives 1/8 at the cell center") {
    for (auto& level : grid.levels)
      for (double& v : level) v = 0.0;
    int side = cfg.level_side(0);
    grid.levels[0][0] = 1.0;  // corner (0,0,0)
    double h = 0.5 / (side - 1);
    CHECK(grid.interpolate_level(0, Vec3(h, h, h)) == doctest::Approx(0.125).epsilon(1e-12));
  }
}

TEST_CASE("decoders against the logistic and an independent oracle") {
  field::GridConfig cfg{3, 5, 1.5};
  std::mt19937_64 rng(3);
  BoxTransform box;
  field::ObjectModel model = field::ObjectModel::create(cfg, box, rng);

  SUBCASE("zero parameters decode to one half") {
    for (auto* t : field::tensor_ptrs(model))
      std::fill(t->begin(), t->end(), 0.0);
    CHECK(model.decode_occupancy(Vec3(0.3, 0.4, 0.5)) == doctest::Approx(0.5).epsilon(1e-12));
    Vec3 c = model.decode_color(Vec3(0.3, 0.4, 0.5));
    CHECK(c.isApprox(Vec3(0.5, 0.5, 0.5), 1e-12));
  }

  SUBCASE("large output bias saturates") {
    model.geo_mlp.biases.back()[0] = 20.0;
    CHECK(model.decode_occupancy(Vec3(0.5, 0.5, 0.5)) > 0.999);
  }

  SUBCASE("matches the naive dual implementation") {
    field::ObjectModel m = random_model(99, cfg);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::mt19937_64 qrng(5);
    for (int i = 0; i < 200; ++i) {
      Vec3 q(unit(qrng), unit(qrng), unit(qrng));
      CHECK(m.decode_occupancy(q) == doctest::Approx(naive_occupancy(m, q)).epsilon(1e-12));
    }
  }
}

TEST_CASE("evaluate_with_gradients basics") {
  field::ObjectModel model = random_model(42);
  field::GradientBuffer buf = field::GradientBuffer::like(model);
  field::FieldEvaluator eval;
  std::vector<Vec3> coords = {Vec3(0.2, 0.3, 0.4), Vec3(0.7, 0.1, 0.9)};

  SUBCASE("zero upstream leaves the buffer zero") {
    std::vector<double> d_occ(coords.size(), 0.0);
    std::vector<Vec3> d_rgb(coords.size(), Vec3::Zero());
    field::evaluate_with_gradients(model, coords, d_occ, d_rgb, buf, eval);
    for (const auto& t : buf.tensors)
      for (double v : t) CHECK(v == 0.0);
  }

  SUBCASE("frozen geometry receives no gradient") {
    model.frozen_geo_grid = model.frozen_geo_mlp = true;
    std::vector<double> d_occ(coords.size(), 1.0);
    std::vector<Vec3> d_rgb(coords.size(), Vec3(1, 1, 1));
    field::evaluate_with_gradients(model, coords, d_occ, d_rgb, buf, eval);
    auto infos = field::tensor_infos(model);
    bool color_touched = false;
    for (size_t t = 0; t < infos.size(); ++t) {
      double mag = 0;
      for (double v : buf.tensors[t]) mag += std::abs(v);
      if (infos[t].is_geo) CHECK(mag == 0.0);
      else color_touched |= mag > 0;
    }
    CHECK(color_touched);
  }

  SUBCASE("shape mismatch is an error") {
    field::ObjectModel other = random_model(43, {2, 4, 1.5});
    field::GradientBuffer wrong = field::GradientBuffer::like(other);
    std::vector<double> d_occ(coords.size(), 1.0);
    std::vector<Vec3> d_rgb(coords.size(), Vec3::Zero());
    eval.evaluate(model, coords, true);
    CHECK_THROWS_AS(eval.backward(model, d_occ, d_rgb, wrong), std::invalid_argument);
  }
}

TEST_CASE("encode locality touches at most 8 features per level") {
  field::ObjectModel model = random_model(7);
  Vec3 q(0.31, 0.62, 0.18);
  double before = model.decode_occupancy(q);

  // perturb every feature outside the touched cells; output must not move
  for (int l = 0; l < model.geo_grid.config.levels; ++l) {
    field::CellFootprint fp = model.geo_grid.footprint(l, q);
    std::set<int> touched(fp.corner, fp.corner + 8);
    auto& table = model.geo_grid.levels[l];
    for (size_t i = 0; i < table.size(); ++i)
      if (!touched.count(static_cast<int>(i))) table[i] += 100.0;
  }
  double after = model.decode_occupancy(q);
  CHECK(before == after);
}

TEST_CASE("training one side never moves the other side's parameters") {
  field::ObjectModel model = random_model(77);
  std::mt19937_64 rng(4);
  render::TrainWorkspace ws;
  render::RaySampleConfig scfg;
  scfg.n_total = 6;
  scfg.n_surface = 5;
  render::AdamWConfig ocfg;

  std::vector<render::RayTarget> batch;
  for (int i = 0; i < 16; ++i) {
    render::RayTarget ray;
    ray.origin = Vec3(0, 0, -1.0);
    ray.dir = Vec3(0.01 * i - 0.08, 0.01, 1.0);
    ray.depth = 1.0;
    ray.mask = i % 2;
    ray.color = Vec3(0.8, 0.2, 0.4);
    batch.push_back(ray);
  }

  SUBCASE("geometry-only loss leaves color parameters bit-identical") {
    render::LossWeights weights;
    weights.lambda_color = 0.0;
    auto before = model.col_grid.levels;
    auto before_w = model.col_mlp.weights;
    render::train_step(model, batch, scfg, weights, ocfg, ws, rng);
    CHECK(model.col_grid.levels == before);
    CHECK(model.col_mlp.weights == before_w);
  }

  SUBCASE("frozen color stays identical through full training") {
    model.freeze_color();
    auto before = model.col_grid.levels;
    auto before_w = model.col_mlp.weights;
    render::LossWeights weights;
    for (int s = 0; s < 3; ++s) render::train_step(model, batch, scfg, weights, ocfg, ws, rng);
    CHECK(model.col_grid.levels == before);
    CHECK(model.col_mlp.weights == before_w);
  }
}

TEST_CASE("reinterpolate_grid identity, growth, and constants") {
  field::GridConfig cfg{3, 5, 1.5};
  std::mt19937_64 rng(6);
  field::FeatureGrid grid = field::FeatureGrid::create(cfg, rng);
  std::uniform_real_distribution<double> f(-1.0, 1.0);
  for (auto& level : grid.levels)
    for (double& v : level) v = f(rng);

  BoxTransform box;
  box.center = Vec3(1, 1, 1);
  box.extent = Vec3(0.2, 0.2, 0.2);

  SUBCASE("identity mapping reproduces features bit-exactly") {
    BoxTransform delta = field::box_change(box, box);
    field::FeatureGrid out = field::reinterpolate_grid(grid, delta, rng);
    for (int l = 0; l < cfg.levels; ++l) CHECK(out.levels[l] == grid.levels[l]);
  }

  SUBCASE("doubled box keeps interior values and randomizes the rest") {
    BoxTransform grown = box;
    grown.extent = box.extent * 2.0;
    BoxTransform delta = field::box_change(box, grown);
    field::FeatureGrid out = field::reinterpolate_grid(grid, delta, rng);
    for (int l = 0; l < cfg.levels; ++l) {
      int side = cfg.level_side(l);
      size_t i = 0;
      for (int z = 0; z < side; ++z)
        for (int y = 0; y < side; ++y)
          for (int x = 0; x < side; ++x, ++i) {
            Vec3 q_new(static_cast<double>(x) / (side - 1), static_cast<double>(y) / (side - 1),
                       static_cast<double>(z) / (side - 1));
            Vec3 q_old = delta.from_box(q_new);
            bool inside = q_old.minCoeff() >= -1e-9 && q_old.maxCoeff() <= 1 + 1e-9;
            if (inside) {
              CHECK(std::abs(out.levels[l][i] - naive_interpolate(grid, l, q_old)) < 1e-7);
            } else {
              CHECK(std::abs(out.levels[l][i]) <= 1e-4);  // init distribution
            }
          }
    }
  }

  SUBCASE("constant grid stays constant inside") {
    for (auto& level : grid.levels)
      for (double& v : level) v = 0.4;
    BoxTransform grown = box;
    grown.extent = box.extent * 1.5;
    field::FeatureGrid out =
        field::reinterpolate_grid(grid, field::box_change(box, grown), rng);
    int side = cfg.level_side(0);
    int mid = side / 2;
    CHECK(out.levels[0][(mid * side + mid) * side + mid] == doctest::Approx(0.4).epsilon(1e-12));
  }
}

// Central-difference gradient check through the full rendering loss for every
// parameter class. A probe only counts when no rectifier or absolute-value
// kink sits between the two evaluation points, otherwise the finite
// difference itself is meaningless.
TEST_CASE("analytic gradients match finite differences") {
  const double h = 1e-4;
  const double tol = 1e-4;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  field::ObjectModel model = random_model(2024);
  render::LossWeights weights;

  struct ProbeRay {
    std::vector<Vec3> coords;
    std::vector<double> depths;
    Vec3 color;
    double depth;
    double mask;
  };

  std::vector<ProbeRay> rays;
  for (int r = 0; r < 5; ++r) {
    ProbeRay ray;
    int n = 3 + static_cast<int>(unit(rng) * 4);
    double d = 0.2 + 0.2 * unit(rng);
    for (int i = 0; i < n; ++i) {
      ray.depths.push_back(d);
      ray.coords.emplace_back(unit(rng), unit(rng), unit(rng));
      d += 0.02 + 0.05 * unit(rng);
    }
    ray.color = Vec3(unit(rng), unit(rng), unit(rng));
    ray.depth = r % 3 == 2 ? 0.0 : 0.3 + 0.3 * unit(rng);  // include mask-only rays
    ray.mask = r % 3 == 1 ? 0.0 : 1.0;
    rays.push_back(std::move(ray));
  }

  // Loss plus the signs of every non-smooth quantity along the way.
  auto loss_and_kinks = [&](const field::ObjectModel& m, std::vector<int>* kinks) {
    field::FieldEvaluator eval;
    double total = 0;
    for (const ProbeRay& ray : rays) {
      eval.evaluate(m, ray.coords, true);
      render::RenderSample s = render::composite(eval.occupancy(), eval.color(), ray.depths);
      total += render::compute_losses(s, ray.color, ray.depth, ray.mask, weights).total;
      if (!kinks) continue;
      auto push = [&](double v) { kinks->push_back(v > 0 ? 1 : (v < 0 ? -1 : 0)); };
      for (const Vec3& q : ray.coords) {
        std::vector<double> pre;
        std::vector<double> geo_embed(m.geo_grid.config.levels);
        std::vector<double> col_embed(m.col_grid.config.levels);
        m.geo_grid.encode(q, geo_embed.data());
        m.col_grid.encode(q, col_embed.data());
        naive_mlp(m.geo_mlp, geo_embed, &pre);
        naive_mlp(m.col_mlp, col_embed, &pre);
        for (double z : pre) push(z);
      }
      for (int c = 0; c < 3; ++c) push(ray.color[c] - s.color[c]);
      push(ray.depth - s.depth);
      push(ray.mask - s.mask);
      push(s.depth_variance - weights.variance_floor);
    }
    return total / rays.size();
  };

  field::GradientBuffer analytic = field::GradientBuffer::like(model);
  {
    field::FieldEvaluator eval;
    for (const ProbeRay& ray : rays) {
      eval.evaluate(model, ray.coords, true);
      render::RenderSample s = render::composite(eval.occupancy(), eval.color(), ray.depths);
      render::LossAdjoints adj;
      render::compute_losses(s, ray.color, ray.depth, ray.mask, weights, &adj);
      std::vector<double> d_occ(ray.coords.size());
      std::vector<Vec3> d_col(ray.coords.size());
      double inv = 1.0 / rays.size();
      render::composite_backward(s, adj.d_color * inv, adj.d_depth * inv, adj.d_mask * inv,
                                 adj.d_variance * inv, d_occ, d_col);
      eval.backward(model, d_occ, d_col, analytic);
    }
  }

  auto ptrs = field::tensor_ptrs(model);
  auto infos = field::tensor_infos(model);
  int checked = 0, skipped = 0;
  std::uniform_int_distribution<size_t> any_index;
  for (size_t t = 0; t < ptrs.size(); ++t) {
    std::vector<size_t> picks;
    for (size_t i = 0; i < ptrs[t]->size() && picks.size() < 4; ++i)
      if (std::abs(analytic.tensors[t][i]) > 1e-9) picks.push_back(i);
    for (size_t i : picks) {
      double saved = (*ptrs[t])[i];
      std::vector<int> kinks_plus, kinks_minus;
      (*ptrs[t])[i] = saved + h;
      double plus = loss_and_kinks(model, &kinks_plus);
      (*ptrs[t])[i] = saved - h;
      double minus = loss_and_kinks(model, &kinks_minus);
      (*ptrs[t])[i] = saved;
      if (kinks_plus != kinks_minus ||
          std::find(kinks_plus.begin(), kinks_plus.end(), 0) != kinks_plus.end()) {
        skipped++;
        continue;  // a kink crossed between the evaluation points
      }
      double fd = (plus - minus) / (2 * h);
      double a = analytic.tensors[t][i];
      double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8});
      INFO("tensor ", infos[t].name, " index ", i, " analytic ", a, " fd ", fd);
      CHECK(rel < tol);
      checked++;
    }
  }
  CHECK(checked >= 30);
  CHECK(skipped <= checked);  // kinks must stay the exception
}
