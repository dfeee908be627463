#include "semnav/image.hpp"

#include <algorithm>
#include <fstream>

#include "semnav/grid.hpp"

namespace semnav {

void write_ppm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_ppm: cannot open " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  for (const Rgb& px : img.pixels) out.write(reinterpret_cast<const char*>(px.data()), 3);
  if (!out) throw Error("write_ppm: write failed for " + path);
}

Rgb class_color(int class_index) {
  static const Rgb palette[] = {
      {160, 160, 160},  // empty: gray
      {255, 255, 255},  // wall: white
      {0, 255, 255},    // lava: cyan
      {160, 32, 240},   // lawn: purple
      {255, 128, 0},    {0, 128, 0}, {128, 0, 0}, {0, 0, 128},
  };
  return palette[class_index % 8];
}

Rgb gray_color(double v01) {
  const double v = std::clamp(v01, 0.0, 1.0);
  const auto b = static_cast<std::uint8_t>(v * 255.0 + 0.5);
  return {b, b, b};
}

}  // namespace semnav
