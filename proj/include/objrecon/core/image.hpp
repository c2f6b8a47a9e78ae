#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace objrecon {

/// Dense row-major image. Pixel (x, y) is column x of row y.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, int c = 1, T fill = T{})
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, fill) {
    if (w < 0 || h < 0 || c < 1) throw std::invalid_argument("bad image dims");
  }

  bool empty() const { return data.empty(); }
  size_t pixel_count() const { return static_cast<size_t>(width) * height; }

  bool contains(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }

  T& at(int x, int y, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  const T& at(int x, int y, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
};

using ImageF = Image<float>;
using ImageU16 = Image<uint16_t>;
using ImageU8 = Image<uint8_t>;

}  // namespace objrecon
