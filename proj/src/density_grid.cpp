#include "nesdf/density_grid.hpp"
#include "nesdf/binary_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace nesdf {

namespace {

std::string describe(const Vec3& p)
{
    std::ostringstream os;
    os << '(' << p.x() << ", " << p.y() << ", " << p.z() << ')';
    return os.str();
}

void checkResolution(const std::array<int, 3>& res)
{
    for (int n : res)
        if (n < 2)
            throw DomainError("density grid: resolution must be at least 2 per axis");
}

void checkBounds(const GridBounds& b)
{
    if (!b.min.allFinite() || !b.max.allFinite() || !(b.max.array() > b.min.array()).all())
        throw DomainError("density grid: degenerate bounds");
}

} // namespace

DensityGrid::DensityGrid(std::array<int, 3> resolution, GridBounds bounds, VecX values)
    : resolution_(resolution), bounds_(std::move(bounds)), values_(std::move(values))
{
    checkResolution(resolution_);
    checkBounds(bounds_);
    const auto expected = static_cast<Eigen::Index>(resolution_[0]) * resolution_[1] * resolution_[2];
    if (values_.size() != expected)
        throw StructuralError("density grid: value count does not match resolution");
    for (Eigen::Index i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]) || values_[i] < 0.0)
            throw DomainError("density grid: negative or non-finite value at cell " + std::to_string(i));
}

Vec3 DensityGrid::cellSize() const
{
    return (bounds_.max - bounds_.min).cwiseQuotient(Vec3(resolution_[0], resolution_[1], resolution_[2]));
}

Vec3 DensityGrid::cellCenter(int ix, int iy, int iz) const
{
    return bounds_.min + cellSize().cwiseProduct(Vec3(ix + 0.5, iy + 0.5, iz + 0.5));
}

Vec3 DensityGrid::cellCenter(std::size_t flat) const
{
    const auto nx = static_cast<std::size_t>(resolution_[0]);
    const auto ny = static_cast<std::size_t>(resolution_[1]);
    return cellCenter(static_cast<int>(flat % nx), static_cast<int>((flat / nx) % ny), static_cast<int>(flat / (nx * ny)));
}

DensityGrid sampleDensityGrid(const DensityFunction& field, std::array<int, 3> resolution, GridBounds bounds)
{
    return sampleDensityGrid(
        [&](const MatX& pts) {
            VecX v(pts.cols());
            for (Eigen::Index j = 0; j < pts.cols(); ++j)
                v[j] = field(pts.col(j));
            return v;
        },
        resolution, std::move(bounds));
}

DensityGrid sampleDensityGrid(const BatchDensityFunction& field, std::array<int, 3> resolution, GridBounds bounds)
{
    checkResolution(resolution);
    checkBounds(bounds);
    const int nx = resolution[0], ny = resolution[1], nz = resolution[2];
    const Vec3 cell = (bounds.max - bounds.min).cwiseQuotient(Vec3(nx, ny, nz));
    VecX values(static_cast<Eigen::Index>(nx) * ny * nz);
    MatX slab(3, static_cast<Eigen::Index>(nx) * ny);
    // one z-slab per call keeps batch evaluation memory bounded
    for (int iz = 0; iz < nz; ++iz) {
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix)
                slab.col(ix + static_cast<Eigen::Index>(nx) * iy) =
                    bounds.min + cell.cwiseProduct(Vec3(ix + 0.5, iy + 0.5, iz + 0.5));
        const VecX v = field(slab);
        if (v.size() != slab.cols())
            throw StructuralError("density grid: field returned wrong number of values");
        for (Eigen::Index k = 0; k < v.size(); ++k)
            if (!std::isfinite(v[k]))
                throw DomainError("density grid: non-finite field value at " + describe(slab.col(k)));
        values.segment(static_cast<Eigen::Index>(iz) * slab.cols(), slab.cols()) = v;
    }
    return DensityGrid(resolution, std::move(bounds), std::move(values));
}

void writeDensityGrid(std::ostream& out, const DensityGrid& grid)
{
    BinaryWriter w(out);
    w.bytes("DGRD");
    w.u32(kGridVersion);
    for (int n : grid.resolution())
        w.u32(static_cast<std::uint32_t>(n));
    for (int i = 0; i < 3; ++i)
        w.f64(grid.bounds().min[i]);
    for (int i = 0; i < 3; ++i)
        w.f64(grid.bounds().max[i]);
    for (Eigen::Index i = 0; i < grid.values().size(); ++i)
        w.f64(grid.values()[i]);
    if (!out)
        throw FormatError("density grid: write failed");
}

DensityGrid readDensityGrid(std::istream& in)
{
    BinaryReader r(in, "density grid");
    if (r.bytes(4) != "DGRD")
        throw FormatError("density grid: bad magic (expected DGRD)");
    const auto version = r.u32();
    if (version != kGridVersion)
        throw FormatError("density grid: unsupported version " + std::to_string(version));
    std::array<int, 3> res{};
    std::uint64_t count = 1;
    for (auto& n : res) {
        const auto v = r.u32();
        if (v < 2 || v > 4096)
            throw FormatError("density grid: implausible resolution " + std::to_string(v));
        n = static_cast<int>(v);
        count *= v;
    }
    GridBounds b;
    for (int i = 0; i < 3; ++i)
        b.min[i] = r.f64();
    for (int i = 0; i < 3; ++i)
        b.max[i] = r.f64();
    VecX values(static_cast<Eigen::Index>(count));
    for (Eigen::Index i = 0; i < values.size(); ++i)
        values[i] = r.f64();
    try {
        return DensityGrid(res, b, std::move(values));
    } catch (const std::exception& e) {
        throw FormatError(std::string("density grid: invalid contents: ") + e.what());
    }
}

void saveDensityGrid(const std::filesystem::path& path, const DensityGrid& grid)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw FormatError("density grid: cannot open " + path.string() + " for writing");
    writeDensityGrid(out, grid);
}

DensityGrid loadDensityGrid(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("density grid: cannot open " + path.string());
    return readDensityGrid(in);
}

} // namespace nesdf
