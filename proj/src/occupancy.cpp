#include "nesdf/occupancy.hpp"
#include "nesdf/rng.hpp"

#include <cmath>

namespace nesdf {

OccupancyOracle::OccupancyOracle(std::vector<Vec3> occupied, double threshold)
    : tree_(std::move(occupied)), threshold_(threshold)
{
}

bool OccupancyOracle::query(const Vec3& q, double r) const
{
    if (!(r > 0.0) || !std::isfinite(r))
        throw DomainError("occupancy query: radius must be positive and finite");
    if (!q.allFinite())
        throw DomainError("occupancy query: non-finite position");
    return tree_.anyWithinSquared(q, r * r);
}

double OccupancyOracle::nearestDistance(const Vec3& q) const { return std::sqrt(tree_.nearestSquared(q)); }

OccupancyOracle buildOracle(const DensityGrid& grid, double threshold)
{
    if (!(threshold >= 0.0) || !std::isfinite(threshold))
        throw DomainError("build oracle: threshold must be finite and non-negative");
    std::vector<Vec3> pts;
    const auto& v = grid.values();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v[i] > threshold)
            pts.push_back(grid.cellCenter(static_cast<std::size_t>(i)));
    return OccupancyOracle(std::move(pts), threshold);
}

double defaultThreshold(const DensityGrid& grid) { return 0.5 * grid.values().maxCoeff(); }

std::vector<TrainingSample> generateSamples(const OccupancyOracle& oracle, std::size_t count, std::uint64_t seed)
{
    if (count == 0)
        throw DomainError("generate samples: count must be at least 1");
    Rng rng(seed);
    std::vector<TrainingSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        TrainingSample s;
        s.position.x() = rng.uniform(-1.0, 1.0);
        s.position.y() = rng.uniform(-1.0, 1.0);
        s.position.z() = rng.uniform(-1.0, 1.0);
        s.radius = rng.uniform(kMinSampleRadius, kMaxSampleRadius);
        s.label = oracle.query(s.position, s.radius) ? 1 : 0;
        out.push_back(s);
    }
    return out;
}

SampleBatch toBatch(const std::vector<TrainingSample>& samples)
{
    SampleBatch b;
    const auto n = static_cast<Eigen::Index>(samples.size());
    b.positions.resize(3, n);
    b.radii.resize(n);
    b.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        b.positions.col(i) = s.position;
        b.radii[i] = s.radius;
        b.labels[i] = s.label;
    }
    return b;
}

} // namespace nesdf
