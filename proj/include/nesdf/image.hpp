#pragma once

#include "nesdf/common.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace nesdf {

/// 8-bit RGB raster, row 0 at the top.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::array<std::uint8_t, 3>> pixels;

    std::array<std::uint8_t, 3>& at(int x, int y) { return pixels[static_cast<std::size_t>(y * width + x)]; }
};

/// Binary P5 with maxval 255. values(j, i) is sampled at lattice (i, j); values are clamped to
/// [lo, hi] and mapped linearly to 0..255. Row j = 0 is written last so +v points up.
void writePgm(std::ostream& out, const MatX& values, double lo, double hi);
void writePgm(const std::filesystem::path& path, const MatX& values, double lo, double hi);

RgbImage grayscaleToRgb(const MatX& values, double lo, double hi);
/// Binary P6.
void writePpm(const std::filesystem::path& path, const RgbImage& image);

} // namespace nesdf
