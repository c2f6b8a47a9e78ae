#pragma once

#include <string>
#include <vector>

#include "objrecon/core/types.hpp"

namespace objrecon::io {

/// On-disk RGB-D sequence:
///   frame_%06d.color.png   8-bit RGB
///   frame_%06d.depth.png   16-bit single channel, meters * depth_scale
///   frame_%06d.mask.png    16-bit instance ids, 0 = background
///   poses.txt              frame index + 16 row-major floats (camera-to-world)
///   intrinsics.txt         fx fy cx cy width height depth_scale
///   categories.txt         optional instance-id category-id pairs
class Dataset {
 public:
  explicit Dataset(const std::string& directory);

  size_t size() const { return frame_indices_.size(); }
  const Intrinsics& intrinsics() const { return intrinsics_; }
  long frame_index(size_t i) const { return frame_indices_[i]; }

  /// Loads the i-th frame (images decoded on demand).
  Frame load(size_t i) const;

 private:
  std::string dir_;
  Intrinsics intrinsics_;
  std::vector<long> frame_indices_;
  std::vector<Pose> poses_;
  std::map<int, int> categories_;
};

/// Writes one frame; creates the directory on first use. The caller writes
/// intrinsics/poses once via the companion functions.
void write_frame(const std::string& directory, const Frame& frame);
void write_intrinsics(const std::string& directory, const Intrinsics& intrinsics);
void write_poses(const std::string& directory, const std::vector<long>& indices,
                 const std::vector<Pose>& poses);
void write_categories(const std::string& directory, const std::map<int, int>& categories);

}  // namespace objrecon::io
