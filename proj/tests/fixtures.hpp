#pragma once

#include "nesdf/backbone.hpp"
#include "nesdf/density_grid.hpp"
#include "nesdf/head.hpp"
#include "nesdf/occupancy.hpp"
#include "nesdf/scene.hpp"

#include <sstream>

namespace nesdf::testing {

/// Backbone pretrained on a centered sphere, 64^3 oracle from its densities, depth-2 head.
/// Built once per process; several suites share it.
struct SphereFixture {
    AnalyticScene scene;
    DensityBackbone backbone;
    DensityGrid grid;
    OccupancyOracle oracle;
    HeadModel head;
    PretrainResult pretrainResult;
    TrainReport report;
    std::string backboneBytesBeforeHead;
};

inline std::string checkpointBytes(const Checkpoint& ck)
{
    std::stringstream ss;
    writeCheckpoint(ss, ck);
    return ss.str();
}

inline const SphereFixture& sphereFixture()
{
    static const SphereFixture fx = [] {
        const AnalyticScene scene = centeredSphereScene(0.2);
        DensityBackbone bb = DensityBackbone::create({}, 101);
        PretrainResult pr = pretrain(bb, sceneTarget(scene, kOccupiedDensity, 128), {.steps = 2000, .seed = 102});
        DensityGrid grid =
            sampleDensityGrid([&](const MatX& p) { return bb.density(p); }, {64, 64, 64});
        OccupancyOracle oracle = buildOracle(grid, defaultThreshold(grid));
        const std::string before = checkpointBytes(bb.toCheckpoint());
        HeadModel head = HeadModel::create(bb, {}, 103);
        TrainReport report = trainHead(head, oracle, {.seed = 104});
        return SphereFixture{scene, std::move(bb), std::move(grid), std::move(oracle), std::move(head),
                             std::move(pr), std::move(report), before};
    }();
    return fx;
}

} // namespace nesdf::testing
