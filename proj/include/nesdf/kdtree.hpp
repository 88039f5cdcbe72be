#pragma once

#include "nesdf/common.hpp"

#include <cstdint>
#include <vector>

namespace nesdf {

/// Static 3-D kd-tree over a point set. Points are stored in tree order.
class KdTree3 {
public:
    KdTree3() = default;
    explicit KdTree3(std::vector<Vec3> points, int leafSize = 8);

    bool empty() const { return points_.empty(); }
    std::size_t size() const { return points_.size(); }
    const std::vector<Vec3>& points() const { return points_; }

    /// true iff some point p has |p - q|^2 <= radiusSq.
    bool anyWithinSquared(const Vec3& q, double radiusSq) const;

    /// Squared distance to the nearest point, +inf when empty.
    double nearestSquared(const Vec3& q) const;

private:
    struct Node {
        Vec3 lo, hi;              // bounding box of the node's points
        std::uint32_t begin, end; // point range
        std::int32_t left = -1, right = -1;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    static double boxDistanceSquared(const Node& n, const Vec3& q);

    std::vector<Vec3> points_;
    std::vector<Node> nodes_;
    int leafSize_ = 8;
};

} // namespace nesdf
