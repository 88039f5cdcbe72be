#pragma once

#include "nesdf/common.hpp"

#include <string>
#include <variant>
#include <vector>

namespace nesdf {

struct Sphere {
    Vec3 center;
    double radius;
};

/// Axis-aligned box given by center and half extents.
struct Box {
    Vec3 center;
    Vec3 halfExtents;
};

using Primitive = std::variant<Sphere, Box>;

/// Union of primitives, each touching the normalized cube [-1,1]^3.
class AnalyticScene {
public:
    explicit AnalyticScene(std::vector<Primitive> primitives);

    const std::vector<Primitive>& primitives() const { return primitives_; }

    /// Parses "sphere:cx,cy,cz,r; box:cx,cy,cz,hx,hy,hz".
    static AnalyticScene parse(const std::string& text);
    std::string toString() const;

private:
    std::vector<Primitive> primitives_;
};

/// Unsigned Euclidean distance to the union, 0 inside.
double sceneDistance(const AnalyticScene& scene, const Vec3& q);

/// Unit direction of increasing distance (gradient of sceneDistance outside the geometry).
/// Inside a primitive it points towards the nearest exit of that primitive.
Vec3 sceneNormal(const AnalyticScene& scene, const Vec3& q);

bool sceneContains(const AnalyticScene& scene, const Vec3& q);

/// Sphere and box side by side; default scene of the tools.
AnalyticScene sphereBoxScene();
/// A single centered sphere.
AnalyticScene centeredSphereScene(double radius = 0.2);
/// Two spheres and a slab-like box.
AnalyticScene clutterScene();

enum class Axis { X = 0, Y = 1, Z = 2 };

struct SlicePlane {
    Axis axis = Axis::Z;
    double offset = 0.0;
};

/// Cell-center lattice point (i, j) of an n x n slice over [-1,1]^2. i runs along the first
/// in-plane axis, j along the second (x,y for a z-slice; y,z for x; x,z for y).
Vec3 slicePoint(const SlicePlane& plane, int n, int i, int j);

/// scene distance on the slice lattice; result(j, i) so rows follow the second in-plane axis.
MatX groundTruthEsdfSlice(const AnalyticScene& scene, const SlicePlane& plane, int resolution);

} // namespace nesdf
