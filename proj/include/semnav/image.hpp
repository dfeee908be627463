#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace semnav {

using Rgb = std::array<std::uint8_t, 3>;

struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;  // row-major

  Image() = default;
  Image(int w, int h, Rgb fill = {0, 0, 0}) : width(w), height(h) {
    pixels.assign(static_cast<std::size_t>(w) * h, fill);
  }
  Rgb& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

/// Binary PPM (P6).
void write_ppm(const Image& img, const std::string& path);

/// Fixed palette for semantic classes: empty gray, wall white, lava cyan,
/// lawn purple; classes beyond that cycle through spare colors.
Rgb class_color(int class_index);

/// Grayscale for a scalar field value normalized to [0, 1].
Rgb gray_color(double v01);

}  // namespace semnav
