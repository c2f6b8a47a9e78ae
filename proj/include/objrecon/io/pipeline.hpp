#pragma once

#include <string>

#include "objrecon/io/config.hpp"
#include "objrecon/mesh/metrics.hpp"
#include "objrecon/synth/primitives.hpp"
#include "objrecon/synth/trajectory.hpp"

namespace objrecon::io {

/// Synthetic scene description: primitives + a camera trajectory + camera
/// intrinsics, parsed from JSON.
struct SceneSpec {
  std::vector<synth::Primitive> primitives;
  synth::TrajectorySpec trajectory;
  Intrinsics intrinsics;
  double depth_noise_sigma = 0;
};

SceneSpec parse_scene_spec(const std::string& json_text);
SceneSpec load_scene_spec(const std::string& path);

/// Renders the scene along its trajectory and writes the dataset directory.
void generate_dataset(const SceneSpec& spec, const std::string& out_dir, uint64_t seed);

struct FitResult {
  std::vector<int> object_ids;
  std::string out_dir;
};

/// Streams the dataset through the mapper, optionally with a prior library,
/// and writes models/, meshes/, per-object keyframe poses and events.jsonl.
FitResult fit_dataset(const std::string& dataset_dir, const RunConfig& config,
                      const std::string& library_dir, const std::string& out_dir, int threads);

/// Builds a library from a fit output directory (model archives + poses).
void build_library_from_fit(const std::string& fit_dir, const std::string& out_dir,
                            const RunConfig& config);

struct EvalRecord {
  std::string name;
  mesh::MetricReport report;
};

/// Pairs pred/gt PLY files by stem and evaluates; when seen_only, ground
/// truth is culled against the dataset frames first.
std::vector<EvalRecord> evaluate_meshes(const std::string& pred_path, const std::string& gt_path,
                                        const std::vector<double>& thresholds_m, bool seen_only,
                                        const std::string& frames_dir, double cull_tau_m);

std::string format_eval_records(const std::vector<EvalRecord>& records);

int worker_count_from_env();

}  // namespace objrecon::io
