#pragma once

#include "nesdf/density_grid.hpp"
#include "nesdf/kdtree.hpp"

#include <cstdint>
#include <vector>

namespace nesdf {

/// "Is anything occupied within r of q", answered from thresholded density samples.
/// Occupied points are the centers of cells whose density is strictly above the threshold.
class OccupancyOracle {
public:
    /// Raw point-set constructor, mostly for tests.
    OccupancyOracle(std::vector<Vec3> occupied, double threshold);

    bool empty() const { return tree_.empty(); }
    std::size_t occupiedCount() const { return tree_.size(); }
    double threshold() const { return threshold_; }
    const std::vector<Vec3>& occupiedPoints() const { return tree_.points(); }

    /// Throws DomainError unless r > 0.
    bool query(const Vec3& q, double r) const;

    /// Distance to the nearest occupied point; +inf for an empty oracle.
    double nearestDistance(const Vec3& q) const;

private:
    KdTree3 tree_;
    double threshold_;
};

/// Throws DomainError for a negative threshold. An all-below-threshold grid yields an empty oracle.
OccupancyOracle buildOracle(const DensityGrid& grid, double threshold);

/// Threshold default for indicator-like fields: half the grid maximum.
double defaultThreshold(const DensityGrid& grid);

struct TrainingSample {
    Vec3 position;
    double radius;
    std::uint8_t label;
};

inline constexpr double kMinSampleRadius = 0.005;
inline constexpr double kMaxSampleRadius = 0.25;

/// i.i.d. positions in U(-1,1)^3, radii in U(0.005,0.25), labels from the oracle.
std::vector<TrainingSample> generateSamples(const OccupancyOracle& oracle, std::size_t count, std::uint64_t seed);

/// Column-major views for batched training.
struct SampleBatch {
    MatX positions; // 3 x n
    VecX radii;
    VecX labels; // 0.0 or 1.0
};

SampleBatch toBatch(const std::vector<TrainingSample>& samples);

} // namespace nesdf
