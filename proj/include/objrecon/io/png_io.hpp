#pragma once

#include <string>

#include "objrecon/core/image.hpp"

namespace objrecon::io {

void write_png_rgb8(const std::string& path, const Image<uint8_t>& image);   // channels == 3
void write_png_gray16(const std::string& path, const Image<uint16_t>& image);

Image<uint8_t> read_png_rgb8(const std::string& path);
Image<uint16_t> read_png_gray16(const std::string& path);

}  // namespace objrecon::io
