// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "taf/types.hpp"

namespace taf {

/// Bands of a raster image, each vectorized row-major and scaled to [0, 1]
/// by the file's maxval.
struct Image {
  Index width = 0;
  Index height = 0;
  int maxval = 255;
  std::vector<Vec<double>> bands;

  Index pixels() const { return width * height; }
  Index channels() const { return static_cast<Index>(bands.size()); }
};

/// Netpbm grayscale (P2/P5) or RGB (P3/P6), maxval up to 65535.
Image load_image(const std::filesystem::path& path);

/// Writes binary P5 (one band) or P6 (three bands). Values are clamped to
/// [0, 1] and rounded back to integer levels, so save after load is lossless.
void save_image(const std::filesystem::path& path, const Image& image);

}  // namespace taf
