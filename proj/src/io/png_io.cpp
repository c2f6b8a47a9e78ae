#include "objrecon/io/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

namespace objrecon::io {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

void write_png(const std::string& path, const void* data, int width, int height, int bit_depth,
               int color_type, size_t row_bytes) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw std::runtime_error("cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png write failed: " + path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // buffers are host little-endian

  std::vector<png_bytep> rows(height);
  auto* bytes = static_cast<png_byte*>(const_cast<void*>(data));
  for (int y = 0; y < height; ++y) rows[y] = bytes + y * row_bytes;
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void read_png(const std::string& path, std::vector<uint8_t>& data, int& width, int& height,
              int expect_bit_depth, int expect_color_type, size_t bytes_per_pixel) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw std::runtime_error("cannot open: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("png read failed: " + path);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  int bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);

  // Normalize common variants toward the expected layout.
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (expect_color_type == PNG_COLOR_TYPE_RGB && color_type == PNG_COLOR_TYPE_RGB_ALPHA)
    png_set_strip_alpha(png);
  if (expect_color_type == PNG_COLOR_TYPE_RGB && bit_depth == 16) png_set_strip_16(png);
  if (expect_color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 16)
    png_set_expand_gray_1_2_4_to_8(png);
  if (expect_bit_depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  bit_depth = png_get_bit_depth(png, info);
  color_type = png_get_color_type(png, info);
  if (bit_depth != expect_bit_depth || color_type != expect_color_type) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("unexpected png layout in " + path);
  }

  data.resize(static_cast<size_t>(width) * height * bytes_per_pixel);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = data.data() + static_cast<size_t>(y) * width * bytes_per_pixel;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
}

}  // namespace

void write_png_rgb8(const std::string& path, const Image<uint8_t>& image) {
  if (image.channels != 3) throw std::invalid_argument("rgb png needs 3 channels");
  write_png(path, image.data.data(), image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
            static_cast<size_t>(image.width) * 3);
}

void write_png_gray16(const std::string& path, const Image<uint16_t>& image) {
  if (image.channels != 1) throw std::invalid_argument("gray png needs 1 channel");
  write_png(path, image.data.data(), image.width, image.height, 16, PNG_COLOR_TYPE_GRAY,
            static_cast<size_t>(image.width) * 2);
}

Image<uint8_t> read_png_rgb8(const std::string& path) {
  std::vector<uint8_t> data;
  int w, h;
  read_png(path, data, w, h, 8, PNG_COLOR_TYPE_RGB, 3);
  Image<uint8_t> image(w, h, 3);
  image.data.assign(data.begin(), data.end());
  return image;
}

Image<uint16_t> read_png_gray16(const std::string& path) {
  std::vector<uint8_t> data;
  int w, h;
  read_png(path, data, w, h, 16, PNG_COLOR_TYPE_GRAY, 2);
  Image<uint16_t> image(w, h, 1);
  std::memcpy(image.data.data(), data.data(), data.size());
  return image;
}

}  // namespace objrecon::io
