#include "nesdf/esdf_eval.hpp"

#include <cmath>

namespace nesdf {

EsdfCalibration fitCalibration(const VecX& raw, const VecX& groundTruth)
{
    if (raw.size() != groundTruth.size() || raw.size() == 0)
        throw StructuralError("calibration: empty or mismatched probe vectors");
    const double mx = raw.mean();
    const double my = groundTruth.mean();
    const VecX dx = raw.array() - mx;
    const double sxx = dx.squaredNorm();
    EsdfCalibration c;
    if (sxx <= 1e-300 * raw.size()) {
        c.scale = 0.0;
        c.offset = my;
        return c;
    }
    c.scale = dx.dot(groundTruth.array().matrix() - VecX::Constant(groundTruth.size(), my)) / sxx;
    c.offset = my - c.scale * mx;
    return c;
}

EsdfMetrics evaluateEsdf(const VecX& raw, const VecX& groundTruth)
{
    EsdfMetrics m;
    m.calibration = fitCalibration(raw, groundTruth);
    m.probes = static_cast<std::size_t>(raw.size());
    const double range = groundTruth.maxCoeff() - groundTruth.minCoeff();
    if (!(range > 0.0))
        throw DomainError("esdf evaluation: ground truth is constant over the probes");
    const VecX calibrated = (m.calibration.scale * raw).array() + m.calibration.offset;
    m.normalizedMae = (calibrated - groundTruth).cwiseAbs().mean() / range;
    return m;
}

ProbeSet freeSpaceSliceProbes(const AnalyticScene& scene, const SlicePlane& plane, int resolution)
{
    const MatX gt = groundTruthEsdfSlice(scene, plane, resolution);
    std::vector<Vec3> pts;
    std::vector<double> d;
    for (int j = 0; j < resolution; ++j)
        for (int i = 0; i < resolution; ++i)
            if (gt(j, i) > 0.0) {
                pts.push_back(slicePoint(plane, resolution, i, j));
                d.push_back(gt(j, i));
            }
    ProbeSet p;
    p.positions.resize(3, static_cast<Eigen::Index>(pts.size()));
    p.groundTruth.resize(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) {
        p.positions.col(static_cast<Eigen::Index>(k)) = pts[k];
        p.groundTruth[static_cast<Eigen::Index>(k)] = d[k];
    }
    return p;
}

VecX headEsdf(const HeadModel& head, const MatX& positions)
{
    const VecX radii = VecX::Constant(positions.cols(), head.rFixed());
    return -head.logits(head.features().features(positions), radii);
}

MatX headEsdfSlice(const HeadModel& head, const SlicePlane& plane, int resolution)
{
    MatX pts(3, static_cast<Eigen::Index>(resolution) * resolution);
    for (int j = 0; j < resolution; ++j)
        for (int i = 0; i < resolution; ++i)
            pts.col(i + static_cast<Eigen::Index>(resolution) * j) = slicePoint(plane, resolution, i, j);
    const VecX v = headEsdf(head, pts);
    MatX out(resolution, resolution);
    for (int j = 0; j < resolution; ++j)
        for (int i = 0; i < resolution; ++i)
            out(j, i) = v[i + static_cast<Eigen::Index>(resolution) * j];
    return out;
}

} // namespace nesdf
