#pragma once

#include "nesdf/checkpoint.hpp"
#include "nesdf/encoding.hpp"
#include "nesdf/mlp.hpp"
#include "nesdf/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace nesdf {

struct BackboneConfig {
    /// Two octaves: higher bands leave the density with floaters and the truncated features
    /// with gradients too rough for the planner.
    PositionalEncoding encoding{.numFrequencies = 2};
    int depth = 8;
    int width = 128;
    /// 1-based index of the hidden layer that also receives the encoded input (NeRF uses 5).
    std::optional<int> skipLayer;
};

/// Feature function of the first k trunk layers. Holds its own frozen copy of the weights.
class TruncatedBackbone {
public:
    TruncatedBackbone(PositionalEncoding encoding, MlpNetwork layers);

    int depth() const { return static_cast<int>(layers_.layerCount()); }
    int featureDim() const { return layers_.outputDim(); }
    const PositionalEncoding& encoding() const { return encoding_; }
    const MlpNetwork& network() const { return layers_; }

    VecX features(const Vec3& q) const;
    /// 3 x n positions to featureDim x n activations.
    MatX features(const MatX& positions) const;
    /// d features / d q, featureDim x 3.
    MatX featureJacobian(const Vec3& q) const;

    /// Pulls a feature-space cotangent back to position space: (d features/d q)^T seed.
    Vec3 pullback(const Vec3& q, const VecX& featureSeed) const;

private:
    PositionalEncoding encoding_;
    MlpNetwork layers_;
};

/// Density network: encoding, `depth` ReLU layers of `width` units, a linear unit, softplus.
class DensityBackbone {
public:
    DensityBackbone(BackboneConfig cfg, MlpNetwork net);

    /// Glorot-initialized trunk, zero biases, output layer scaled down so sigma starts near softplus(0).
    static DensityBackbone create(const BackboneConfig& cfg, std::uint64_t seed);

    const BackboneConfig& config() const { return cfg_; }
    const MlpNetwork& network() const { return net_; }
    MlpNetwork& mutableNetwork() { return net_; }

    /// Throws DomainError outside [-1,1]^3.
    double density(const Vec3& q) const;
    VecX density(const MatX& positions) const;

    /// 1 <= k <= depth, else DomainError.
    TruncatedBackbone truncate(int k) const;

    Checkpoint toCheckpoint() const;
    static DensityBackbone fromCheckpoint(const Checkpoint& ckpt);

private:
    BackboneConfig cfg_;
    MlpNetwork net_;
};

void saveBackbone(const std::filesystem::path& path, const DensityBackbone& backbone);
DensityBackbone loadBackbone(const std::filesystem::path& path);

/// Regression target for pretraining.
struct PretrainTarget {
    std::function<double(const Vec3&)> density;
    /// Points inside or near the geometry; half of each batch is drawn around them.
    std::vector<Vec3> focus;
};

/// c_occ inside the scene, 0 outside; focus points are the occupied supervision cells.
PretrainTarget sceneTarget(const AnalyticScene& scene, double occupiedDensity, int supervisionResolution);

struct PretrainConfig {
    int steps = 2000;
    int batch = 256;
    double learningRate = 1e-3;
    std::uint64_t seed = 0;
    /// Training positions are snapped to the cell centers of this lattice over [-1,1]^3.
    int supervisionResolution = 128;
    double focusFraction = 0.5;
};

struct PretrainResult {
    std::vector<double> loss; // one entry per step
};

/// MSE regression of sigma onto the target. Throws NumericError on a non-finite loss.
PretrainResult pretrain(DensityBackbone& backbone, const PretrainTarget& target, const PretrainConfig& cfg);

inline constexpr double kOccupiedDensity = 10.0;

} // namespace nesdf
