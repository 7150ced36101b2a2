#include "fusionlab/image_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fusionlab/error.h"

namespace fusionlab {

namespace {

char to_byte(double v) {
  const double c = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
  return static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * c)));
}

}  // namespace

std::string encode_ppm(const Raster& img) {
  std::string out = "P6\n" + std::to_string(img.width()) + " " +
                    std::to_string(img.height()) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(img.height()) * img.width() * 3);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      if (img.channels() == 3) {
        for (int ch = 0; ch < 3; ++ch) out.push_back(to_byte(img.at(r, c, ch)));
      } else {
        double s = 0.0;
        for (int ch = 0; ch < img.channels(); ++ch) s += img.at(r, c, ch);
        const char b = to_byte(s / img.channels());
        out.append(3, b);
      }
    }
  }
  return out;
}

void emit_image(const Raster& img, const std::string& path) {
  const std::string bytes = encode_ppm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

Raster normalize_for_display(const Raster& map) {
  double hi = 0.0;
  for (double v : map.values()) hi = std::max(hi, v);
  return hi > 0.0 ? scale(map, 1.0 / hi) : map;
}

}  // namespace fusionlab
