#include "nesdf/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace nesdf {

namespace {

std::uint8_t toByte(double v, double lo, double hi)
{
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0)));
}

} // namespace

void writePgm(std::ostream& out, const MatX& values, double lo, double hi)
{
    const auto h = values.rows(), w = values.cols();
    out << "P5\n" << w << ' ' << h << "\n255\n";
    for (Eigen::Index j = h; j-- > 0;)
        for (Eigen::Index i = 0; i < w; ++i)
            out.put(static_cast<char>(toByte(values(j, i), lo, hi)));
}

void writePgm(const std::filesystem::path& path, const MatX& values, double lo, double hi)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw FormatError("pgm: cannot open " + path.string());
    writePgm(out, values, lo, hi);
}

RgbImage grayscaleToRgb(const MatX& values, double lo, double hi)
{
    RgbImage img;
    img.width = static_cast<int>(values.cols());
    img.height = static_cast<int>(values.rows());
    img.pixels.resize(static_cast<std::size_t>(img.width * img.height));
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const auto g = toByte(values(img.height - 1 - y, x), lo, hi);
            img.at(x, y) = {g, g, g};
        }
    return img;
}

void writePpm(const std::filesystem::path& path, const RgbImage& image)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw FormatError("ppm: cannot open " + path.string());
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    for (const auto& p : image.pixels)
        out.write(reinterpret_cast<const char*>(p.data()), 3);
}

} // namespace nesdf
