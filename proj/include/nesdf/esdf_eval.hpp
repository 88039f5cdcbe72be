#pragma once

#include "nesdf/head.hpp"
#include "nesdf/scene.hpp"

#include <vector>

namespace nesdf {

/// Affine map a * raw + b onto metric distance.
struct EsdfCalibration {
    double scale = 1.0;
    double offset = 0.0;

    double apply(double raw) const { return scale * raw + offset; }
};

/// Least-squares fit of gt ~ a * raw + b. A constant raw field gives a = 0, b = mean(gt).
EsdfCalibration fitCalibration(const VecX& raw, const VecX& groundTruth);

struct EsdfMetrics {
    EsdfCalibration calibration;
    /// mean |a*raw + b - gt| with both fields expressed on the ground truth's [0,1] range.
    double normalizedMae = 0.0;
    std::size_t probes = 0;
};

EsdfMetrics evaluateEsdf(const VecX& raw, const VecX& groundTruth);

/// Free-space probes (scene distance > 0) on an n x n slice lattice.
struct ProbeSet {
    MatX positions; // 3 x m
    VecX groundTruth;
};

ProbeSet freeSpaceSliceProbes(const AnalyticScene& scene, const SlicePlane& plane, int resolution);

/// -logit at the head's fixed radius for every probe.
VecX headEsdf(const HeadModel& head, const MatX& positions);

/// Raw field on the n x n slice lattice, laid out like groundTruthEsdfSlice.
MatX headEsdfSlice(const HeadModel& head, const SlicePlane& plane, int resolution);

} // namespace nesdf
