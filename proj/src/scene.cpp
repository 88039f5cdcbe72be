#include "nesdf/scene.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace nesdf {

namespace {

double distanceTo(const Sphere& s, const Vec3& q) { return std::max(0.0, (q - s.center).norm() - s.radius); }

double distanceTo(const Box& b, const Vec3& q)
{
    const Vec3 outside = ((q - b.center).cwiseAbs() - b.halfExtents).cwiseMax(0.0);
    return outside.norm();
}

// signed variant used to pick the owning primitive and the exit direction inside
double signedDistanceTo(const Sphere& s, const Vec3& q) { return (q - s.center).norm() - s.radius; }

double signedDistanceTo(const Box& b, const Vec3& q)
{
    const Vec3 d = (q - b.center).cwiseAbs() - b.halfExtents;
    return d.cwiseMax(0.0).norm() + std::min(d.maxCoeff(), 0.0);
}

Vec3 normalOf(const Sphere& s, const Vec3& q)
{
    const Vec3 d = q - s.center;
    const double n = d.norm();
    return n > 0.0 ? Vec3(d / n) : Vec3::UnitX();
}

Vec3 normalOf(const Box& b, const Vec3& q)
{
    const Vec3 rel = q - b.center;
    const Vec3 d = rel.cwiseAbs() - b.halfExtents;
    Vec3 sign = rel.unaryExpr([](double v) { return v < 0.0 ? -1.0 : 1.0; });
    if (d.maxCoeff() > 0.0) {
        Vec3 n = d.cwiseMax(0.0).cwiseProduct(sign);
        return n / n.norm();
    }
    Eigen::Index axis;
    d.maxCoeff(&axis);
    Vec3 n = Vec3::Zero();
    n[axis] = sign[axis];
    return n;
}

bool touchesCube(const Primitive& p)
{
    const Vec3 lo = Vec3::Constant(-1.0), hi = Vec3::Constant(1.0);
    const Vec3 c = std::visit([](const auto& s) { return s.center; }, p);
    const Vec3 nearest = c.cwiseMax(lo).cwiseMin(hi);
    return std::visit([&](const auto& s) { return distanceTo(s, nearest) == 0.0; }, p);
}

std::vector<double> parseNumbers(const std::string& text)
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const double x = std::stod(item, &used);
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
            ++used;
        if (used != item.size())
            throw std::invalid_argument(item);
        v.push_back(x);
    }
    return v;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

AnalyticScene::AnalyticScene(std::vector<Primitive> primitives) : primitives_(std::move(primitives))
{
    if (primitives_.empty())
        throw DomainError("scene: at least one primitive is required");
    for (const auto& p : primitives_) {
        const bool ok = std::visit(
            [](const auto& s) {
                if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Sphere>)
                    return s.center.allFinite() && std::isfinite(s.radius) && s.radius > 0.0;
                else
                    return s.center.allFinite() && s.halfExtents.allFinite() && (s.halfExtents.array() > 0.0).all();
            },
            p);
        if (!ok)
            throw DomainError("scene: primitive with non-finite or non-positive size");
        if (!touchesCube(p))
            throw DomainError("scene: primitive does not intersect the normalized cube");
    }
}

AnalyticScene AnalyticScene::parse(const std::string& text)
{
    std::vector<Primitive> prims;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ';')) {
        part = trim(part);
        if (part.empty())
            continue;
        const auto colon = part.find(':');
        if (colon == std::string::npos)
            throw DomainError("scene: expected kind:numbers in '" + part + "'");
        const std::string kind = trim(part.substr(0, colon));
        std::vector<double> n;
        try {
            n = parseNumbers(part.substr(colon + 1));
        } catch (const std::exception&) {
            throw DomainError("scene: bad number list in '" + part + "'");
        }
        if (kind == "sphere" && n.size() == 4)
            prims.emplace_back(Sphere{Vec3(n[0], n[1], n[2]), n[3]});
        else if (kind == "box" && n.size() == 6)
            prims.emplace_back(Box{Vec3(n[0], n[1], n[2]), Vec3(n[3], n[4], n[5])});
        else
            throw DomainError("scene: cannot parse primitive '" + part + "'");
    }
    return AnalyticScene(std::move(prims));
}

std::string AnalyticScene::toString() const
{
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& p : primitives_) {
        if (!first)
            os << "; ";
        first = false;
        if (const auto* s = std::get_if<Sphere>(&p))
            os << "sphere:" << s->center.x() << ',' << s->center.y() << ',' << s->center.z() << ',' << s->radius;
        else {
            const auto& b = std::get<Box>(p);
            os << "box:" << b.center.x() << ',' << b.center.y() << ',' << b.center.z() << ',' << b.halfExtents.x()
               << ',' << b.halfExtents.y() << ',' << b.halfExtents.z();
        }
    }
    return os.str();
}

double sceneDistance(const AnalyticScene& scene, const Vec3& q)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : scene.primitives())
        best = std::min(best, std::visit([&](const auto& s) { return distanceTo(s, q); }, p));
    return best;
}

Vec3 sceneNormal(const AnalyticScene& scene, const Vec3& q)
{
    double best = std::numeric_limits<double>::infinity();
    const Primitive* owner = nullptr;
    for (const auto& p : scene.primitives()) {
        const double d = std::visit([&](const auto& s) { return signedDistanceTo(s, q); }, p);
        if (d < best) {
            best = d;
            owner = &p;
        }
    }
    return std::visit([&](const auto& s) { return normalOf(s, q); }, *owner);
}

bool sceneContains(const AnalyticScene& scene, const Vec3& q) { return sceneDistance(scene, q) == 0.0; }

AnalyticScene sphereBoxScene()
{
    return AnalyticScene({Sphere{Vec3(-0.35, 0.05, 0.0), 0.3}, Box{Vec3(0.4, -0.1, 0.0), Vec3(0.2, 0.35, 0.25)}});
}

AnalyticScene centeredSphereScene(double radius) { return AnalyticScene({Sphere{Vec3::Zero(), radius}}); }

AnalyticScene clutterScene()
{
    return AnalyticScene({Sphere{Vec3(-0.3, 0.3, 0.0), 0.25}, Sphere{Vec3(0.35, -0.35, 0.1), 0.22},
                          Box{Vec3(0.2, 0.45, -0.1), Vec3(0.15, 0.15, 0.3)}});
}

Vec3 slicePoint(const SlicePlane& plane, int n, int i, int j)
{
    const double u = -1.0 + (2.0 * i + 1.0) / n;
    const double v = -1.0 + (2.0 * j + 1.0) / n;
    switch (plane.axis) {
    case Axis::X:
        return {plane.offset, u, v};
    case Axis::Y:
        return {u, plane.offset, v};
    case Axis::Z:
        break;
    }
    return {u, v, plane.offset};
}

MatX groundTruthEsdfSlice(const AnalyticScene& scene, const SlicePlane& plane, int resolution)
{
    if (resolution < 1)
        throw DomainError("slice: resolution must be positive");
    if (!(plane.offset >= -1.0 && plane.offset <= 1.0))
        throw DomainError("slice: plane offset outside [-1,1]");
    MatX out(resolution, resolution);
    for (int j = 0; j < resolution; ++j)
        for (int i = 0; i < resolution; ++i)
            out(j, i) = sceneDistance(scene, slicePoint(plane, resolution, i, j));
    return out;
}

} // namespace nesdf
