#include "objrecon/io/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "objrecon/io/png_io.hpp"

namespace objrecon::io {

namespace fs = std::filesystem;

namespace {

std::string frame_name(long index, const char* kind) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "frame_%06ld.%s.png", index, kind);
  return buf;
}

}  // namespace

Dataset::Dataset(const std::string& directory) : dir_(directory) {
  std::ifstream intr(fs::path(dir_) / "intrinsics.txt");
  if (!intr) throw std::runtime_error("dataset missing intrinsics.txt in " + directory);
  intr >> intrinsics_.fx >> intrinsics_.fy >> intrinsics_.cx >> intrinsics_.cy >>
      intrinsics_.width >> intrinsics_.height >> intrinsics_.depth_scale;
  if (!intr) throw std::runtime_error("malformed intrinsics.txt in " + directory);
  intrinsics_.validate();

  std::ifstream poses(fs::path(dir_) / "poses.txt");
  if (!poses) throw std::runtime_error("dataset missing poses.txt in " + directory);
  long index;
  while (poses >> index) {
    double m[16];
    for (double& v : m)
      if (!(poses >> v)) throw std::runtime_error("malformed poses.txt in " + directory);
    Pose pose;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) pose.rotation(r, c) = m[r * 4 + c];
      pose.translation[r] = m[r * 4 + 3];
    }
    pose.validate();
    frame_indices_.push_back(index);
    poses_.push_back(pose);
  }
  if (frame_indices_.empty()) throw std::runtime_error("poses.txt lists no frames in " + directory);

  std::ifstream cats(fs::path(dir_) / "categories.txt");
  if (cats) {
    int instance, category;
    while (cats >> instance >> category) categories_[instance] = category;
  }

  for (long idx : frame_indices_) {
    for (const char* kind : {"color", "depth", "mask"}) {
      fs::path p = fs::path(dir_) / frame_name(idx, kind);
      if (!fs::exists(p)) throw std::runtime_error("dataset frame file missing: " + p.string());
    }
  }
}

Frame Dataset::load(size_t i) const {
  if (i >= frame_indices_.size()) throw std::out_of_range("frame index out of range");
  long index = frame_indices_[i];
  Frame frame;
  frame.index = index;
  frame.pose = poses_[i];
  frame.intrinsics = intrinsics_;
  frame.categories = categories_;

  Image<uint8_t> color = read_png_rgb8((fs::path(dir_) / frame_name(index, "color")).string());
  Image<uint16_t> depth = read_png_gray16((fs::path(dir_) / frame_name(index, "depth")).string());
  frame.masks = read_png_gray16((fs::path(dir_) / frame_name(index, "mask")).string());
  if (color.width != intrinsics_.width || color.height != intrinsics_.height ||
      depth.width != intrinsics_.width || depth.height != intrinsics_.height ||
      frame.masks.width != intrinsics_.width || frame.masks.height != intrinsics_.height)
    throw std::runtime_error("frame image dimensions disagree with intrinsics at frame " +
                             std::to_string(index));

  frame.color = ImageF(color.width, color.height, 3);
  for (size_t p = 0; p < color.data.size(); ++p)
    frame.color.data[p] = static_cast<float>(color.data[p]) / 255.0f;
  frame.depth = ImageF(depth.width, depth.height, 1);
  for (size_t p = 0; p < depth.data.size(); ++p)
    frame.depth.data[p] = static_cast<float>(depth.data[p] / intrinsics_.depth_scale);
  return frame;
}

void write_frame(const std::string& directory, const Frame& frame) {
  fs::create_directories(directory);
  const Intrinsics& intr = frame.intrinsics;

  Image<uint8_t> color(intr.width, intr.height, 3);
  for (size_t p = 0; p < color.data.size(); ++p)
    color.data[p] = static_cast<uint8_t>(
        std::clamp(std::lround(frame.color.data[p] * 255.0f), 0l, 255l));
  write_png_rgb8((fs::path(directory) / frame_name(frame.index, "color")).string(), color);

  Image<uint16_t> depth(intr.width, intr.height, 1);
  for (size_t p = 0; p < depth.data.size(); ++p)
    depth.data[p] = static_cast<uint16_t>(
        std::clamp(std::lround(frame.depth.data[p] * intr.depth_scale), 0l, 65535l));
  write_png_gray16((fs::path(directory) / frame_name(frame.index, "depth")).string(), depth);

  write_png_gray16((fs::path(directory) / frame_name(frame.index, "mask")).string(), frame.masks);
}

void write_intrinsics(const std::string& directory, const Intrinsics& intr) {
  fs::create_directories(directory);
  std::ofstream out(fs::path(directory) / "intrinsics.txt");
  out.precision(17);
  out << intr.fx << " " << intr.fy << " " << intr.cx << " " << intr.cy << " " << intr.width << " "
      << intr.height << " " << intr.depth_scale << "\n";
  if (!out) throw std::runtime_error("cannot write intrinsics.txt");
}

void write_poses(const std::string& directory, const std::vector<long>& indices,
                 const std::vector<Pose>& poses) {
  if (indices.size() != poses.size()) throw std::invalid_argument("pose/index count mismatch");
  fs::create_directories(directory);
  std::ofstream out(fs::path(directory) / "poses.txt");
  out.precision(17);
  for (size_t i = 0; i < poses.size(); ++i) {
    out << indices[i];
    const Pose& pose = poses[i];
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        double v;
        if (r < 3 && c < 3) v = pose.rotation(r, c);
        else if (r < 3) v = pose.translation[r];
        else v = c == 3 ? 1.0 : 0.0;
        out << " " << v;
      }
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("cannot write poses.txt");
}

void write_categories(const std::string& directory, const std::map<int, int>& categories) {
  fs::create_directories(directory);
  std::ofstream out(fs::path(directory) / "categories.txt");
  for (const auto& [instance, category] : categories) out << instance << " " << category << "\n";
  if (!out) throw std::runtime_error("cannot write categories.txt");
}

}  // namespace objrecon::io
