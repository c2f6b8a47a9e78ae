#pragma once

#include <memory>
#include <span>
#include <string>

#include "objrecon/field/grid.hpp"
#include "objrecon/field/mlp.hpp"

namespace objrecon::field {

struct ObjectModel;

/// Identity of one trainable tensor in the canonical parameter order:
/// geometry grid levels, geometry MLP weights/biases, color grid levels,
/// color MLP weights/biases.
struct TensorInfo {
  std::string name;
  bool is_grid = false;
  bool is_geo = false;
};

std::vector<TensorInfo> tensor_infos(const ObjectModel& model);
std::vector<std::vector<double>*> tensor_ptrs(ObjectModel& model);
std::vector<const std::vector<double>*> tensor_ptrs(const ObjectModel& model);

/// Per-parameter accumulators matching a model's canonical tensors.
struct GradientBuffer {
  std::vector<std::vector<double>> tensors;

  static GradientBuffer like(const ObjectModel& model);
  void zero();
  bool matches(const ObjectModel& model) const;
};

/// AdamW first/second moments, one pair per canonical tensor, with a
/// per-tensor step counter so grids can restart cleanly after a box change.
struct AdamMoments {
  std::vector<std::vector<double>> m, v;
  std::vector<long> steps;

  static AdamMoments like(const ObjectModel& model);
  void reset_grids(const ObjectModel& model);
};

/// Per-object implicit function: paired geometry/color feature grids and
/// decoders plus the world-space box that anchors the canonical cube.
struct ObjectModel {
  FeatureGrid geo_grid;
  FeatureGrid col_grid;
  TinyMlp geo_mlp;
  TinyMlp col_mlp;
  BoxTransform box;
  bool frozen_geo_grid = false;
  bool frozen_geo_mlp = false;
  bool frozen_col_grid = false;
  bool frozen_col_mlp = false;
  AdamMoments opt;

  static ObjectModel create(const GridConfig& cfg, const BoxTransform& box, std::mt19937_64& rng);

  bool frozen_geo() const { return frozen_geo_grid && frozen_geo_mlp; }
  bool frozen_col() const { return frozen_col_grid && frozen_col_mlp; }
  void freeze_geometry() { frozen_geo_grid = frozen_geo_mlp = true; }
  void freeze_color() { frozen_col_grid = frozen_col_mlp = true; }
  void freeze_all() { freeze_geometry(); freeze_color(); }
  void freeze_mlps() { frozen_geo_mlp = frozen_col_mlp = true; }

  /// Convenience single-point decoders (allocate scratch; fine outside hot loops).
  double decode_occupancy(const Vec3& box_coord) const;
  Vec3 decode_color(const Vec3& box_coord) const;
};

/// Batched forward/backward evaluation with reusable scratch. A call to
/// evaluate() caches everything backward() needs; the model must not change
/// in between.
class FieldEvaluator {
 public:
  /// Evaluates occupancy (and color unless with_color=false) at canonical
  /// box coordinates.
  void evaluate(const ObjectModel& model, std::span<const Vec3> box_coords,
                bool with_color = true);

  const std::vector<double>& occupancy() const { return occ_; }
  const std::vector<Vec3>& color() const { return rgb_; }

  /// Accumulates d(loss)/d(parameter) into buf given upstream adjoints for
  /// each output. Frozen components receive no gradient. d_rgb may be empty
  /// when the evaluation skipped color.
  void backward(const ObjectModel& model, std::span<const double> d_occ,
                std::span<const Vec3> d_rgb, GradientBuffer& buf);

 private:
  size_t n_ = 0;
  bool with_color_ = false;
  std::vector<CellFootprint> geo_fp_, col_fp_;
  std::vector<double> geo_cache_, col_cache_;
  std::vector<double> occ_, geo_logit_;
  std::vector<Vec3> rgb_;
  std::vector<double> scratch_;
};

/// One-shot wrapper: evaluates the batch and accumulates gradients.
/// Returns occupancy and color through the evaluator outputs.
void evaluate_with_gradients(const ObjectModel& model, std::span<const Vec3> box_coords,
                             std::span<const double> d_occ, std::span<const Vec3> d_rgb,
                             GradientBuffer& buf, FieldEvaluator& eval);

}  // namespace objrecon::field
