#pragma once

#include "nesdf/common.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

namespace nesdf {

struct GridBounds {
    Vec3 min = Vec3::Constant(-1.0);
    Vec3 max = Vec3::Constant(1.0);
};

/// Regular lattice of density samples at cell centers, x-fastest layout.
class DensityGrid {
public:
    DensityGrid(std::array<int, 3> resolution, GridBounds bounds, VecX values);

    const std::array<int, 3>& resolution() const { return resolution_; }
    const GridBounds& bounds() const { return bounds_; }
    const VecX& values() const { return values_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

    std::size_t index(int ix, int iy, int iz) const
    {
        return static_cast<std::size_t>(ix) +
               static_cast<std::size_t>(resolution_[0]) *
                   (static_cast<std::size_t>(iy) + static_cast<std::size_t>(resolution_[1]) * iz);
    }
    double at(int ix, int iy, int iz) const { return values_[static_cast<Eigen::Index>(index(ix, iy, iz))]; }

    Vec3 cellSize() const;
    Vec3 cellCenter(int ix, int iy, int iz) const;
    Vec3 cellCenter(std::size_t flatIndex) const;

private:
    std::array<int, 3> resolution_;
    GridBounds bounds_;
    VecX values_;
};

using DensityFunction = std::function<double(const Vec3&)>;
/// Evaluates a 3 x n block of points at once.
using BatchDensityFunction = std::function<VecX(const MatX&)>;

DensityGrid sampleDensityGrid(const DensityFunction& field, std::array<int, 3> resolution, GridBounds bounds = {});
DensityGrid sampleDensityGrid(const BatchDensityFunction& field, std::array<int, 3> resolution,
                              GridBounds bounds = {});

inline constexpr std::uint32_t kGridVersion = 1;

/// DGRD layout: "DGRD", u32 version, u32 nx, ny, nz, 6 f64 bounds (min xyz, max xyz),
/// nx*ny*nz f64 values x-fastest. Little-endian.
void writeDensityGrid(std::ostream& out, const DensityGrid& grid);
DensityGrid readDensityGrid(std::istream& in);

void saveDensityGrid(const std::filesystem::path& path, const DensityGrid& grid);
DensityGrid loadDensityGrid(const std::filesystem::path& path);

} // namespace nesdf
