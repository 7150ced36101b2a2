#pragma once

#include <string>

#include "fusionlab/grid.h"

namespace fusionlab {

// Binary P6 with maxval 255. Values are clamped to [0, 1] and mapped linearly
// (byte = round(255 v)). One channel is replicated to RGB; three channels are
// written as RGB; any other count is averaged to gray first.
std::string encode_ppm(const Raster& img);
void emit_image(const Raster& img, const std::string& path);

// Rescales a nonnegative map by its maximum (all-zero maps stay zero), for
// viewing salience.
Raster normalize_for_display(const Raster& map);

}  // namespace fusionlab
