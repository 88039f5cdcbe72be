#include "nesdf/kdtree.hpp"

#include <algorithm>
#include <limits>

namespace nesdf {

KdTree3::KdTree3(std::vector<Vec3> points, int leafSize) : points_(std::move(points)), leafSize_(std::max(1, leafSize))
{
    if (points_.size() > std::numeric_limits<std::uint32_t>::max())
        throw StructuralError("kd-tree: too many points");
    if (!points_.empty()) {
        nodes_.reserve(2 * points_.size() / static_cast<std::size_t>(leafSize_) + 1);
        build(0, static_cast<std::uint32_t>(points_.size()));
    }
}

std::int32_t KdTree3::build(std::uint32_t begin, std::uint32_t end)
{
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = node.hi = points_[begin];
    for (std::uint32_t i = begin + 1; i < end; ++i) {
        node.lo = node.lo.cwiseMin(points_[i]);
        node.hi = node.hi.cwiseMax(points_[i]);
    }
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= static_cast<std::uint32_t>(leafSize_))
        return id;

    Eigen::Index axis;
    (node.hi - node.lo).maxCoeff(&axis);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(points_.begin() + begin, points_.begin() + mid, points_.begin() + end,
                     [axis](const Vec3& a, const Vec3& b) { return a[axis] < b[axis]; });
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

double KdTree3::boxDistanceSquared(const Node& n, const Vec3& q)
{
    const Vec3 d = (n.lo - q).cwiseMax(q - n.hi).cwiseMax(0.0);
    return d.squaredNorm();
}

bool KdTree3::anyWithinSquared(const Vec3& q, double radiusSq) const
{
    if (nodes_.empty())
        return false;
    std::int32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& n = nodes_[static_cast<std::size_t>(stack[--top])];
        if (boxDistanceSquared(n, q) > radiusSq)
            continue;
        if (n.left < 0) {
            for (std::uint32_t i = n.begin; i < n.end; ++i)
                if ((points_[i] - q).squaredNorm() <= radiusSq)
                    return true;
            continue;
        }
        stack[top++] = n.right;
        stack[top++] = n.left;
    }
    return false;
}

double KdTree3::nearestSquared(const Vec3& q) const
{
    double best = std::numeric_limits<double>::infinity();
    if (nodes_.empty())
        return best;
    std::int32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& n = nodes_[static_cast<std::size_t>(stack[--top])];
        if (boxDistanceSquared(n, q) >= best)
            continue;
        if (n.left < 0) {
            for (std::uint32_t i = n.begin; i < n.end; ++i)
                best = std::min(best, (points_[i] - q).squaredNorm());
            continue;
        }
        const Node& l = nodes_[static_cast<std::size_t>(n.left)];
        const Node& r = nodes_[static_cast<std::size_t>(n.right)];
        // visit the closer child first
        if (boxDistanceSquared(l, q) < boxDistanceSquared(r, q)) {
            stack[top++] = n.right;
            stack[top++] = n.left;
        } else {
            stack[top++] = n.left;
            stack[top++] = n.right;
        }
    }
    return best;
}

} // namespace nesdf
