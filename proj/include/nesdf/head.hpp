#pragma once

#include "nesdf/backbone.hpp"
#include "nesdf/occupancy.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace nesdf {

/// Which scalar the obstacle gradient differentiates. Both give the same direction; they differ
/// by the positive factor lambda (1 - lambda).
enum class GradientTarget { Logit, Lambda };

struct HeadConfig {
    int depth = 2;      // attachment depth
    int embedDim = 16;  // width of the radius embedding
    double rFixed = 0.05;
    /// Width of a ReLU layer between the concatenation and the logit; 0 maps straight to the logit.
    int hiddenWidth = 0;
};

/// Result of one forward and one backward pass.
struct HeadQuery {
    double logit;
    double lambda;
    Vec3 logitGradient; // d logit / d q
};

/// Radius-conditioned occupancy head on a frozen truncated backbone:
///   logit = W_add [features(q); relu(W_ir r + b_ir)] + b_add,  lambda = sigmoid(logit).
class HeadModel {
public:
    HeadModel(TruncatedBackbone features, MlpNetwork radiusEmbed, MlpNetwork output, double rFixed);

    /// Radius embedding Glorot-initialized, output layer zero-initialized (lambda = 0.5 everywhere).
    static HeadModel create(const DensityBackbone& backbone, const HeadConfig& cfg, std::uint64_t seed);

    int depth() const { return features_.depth(); }
    int embedDim() const { return radiusEmbed_.outputDim(); }
    double rFixed() const { return rFixed_; }
    const TruncatedBackbone& features() const { return features_; }
    const MlpNetwork& radiusEmbed() const { return radiusEmbed_; }
    const MlpNetwork& output() const { return output_; }
    MlpNetwork& mutableRadiusEmbed() { return radiusEmbed_; }
    MlpNetwork& mutableOutput() { return output_; }

    /// q in [-1,1]^3, r in (0, 0.5]; otherwise DomainError.
    double logit(const Vec3& q, double r) const;
    double lambda(const Vec3& q, double r) const;

    /// Pseudo-distance: -logit at the fixed radius. Larger means farther from geometry.
    double esdf(const Vec3& q) const { return -logit(q, rFixed_); }

    /// -d/dq of the logit (default) or of lambda, at the fixed radius.
    Vec3 obstacleGradient(const Vec3& q, GradientTarget target = GradientTarget::Logit) const;

    HeadQuery query(const Vec3& q, double r) const;

    /// Batched logits from precomputed features (featureDim x n) and radii.
    VecX logits(const MatX& features, const VecX& radii) const;

    Checkpoint toCheckpoint() const;
    /// Rebuilds the head on top of backbone; the HEAD extension fixes depth, embed width and r_fixed.
    static HeadModel fromCheckpoint(const Checkpoint& ckpt, const DensityBackbone& backbone);

private:
    TruncatedBackbone features_;
    MlpNetwork radiusEmbed_; // 1 -> embedDim, relu
    MlpNetwork output_;      // featureDim + embedDim -> [hidden relu ->] 1, identity
    double rFixed_;
};

void saveHead(const std::filesystem::path& path, const HeadModel& head);
HeadModel loadHead(const std::filesystem::path& path, const DensityBackbone& backbone);

/// Sum of binary cross-entropies. probabilities in (0,1), labels in {0,1}.
double bceLoss(const VecX& probabilities, const VecX& labels);
/// Same loss from logits via log-sigmoid, stable for large |logit|.
double bceLossFromLogits(const VecX& logits, const VecX& labels);
/// d loss / d logit_i = sigmoid(logit_i) - label_i.
VecX bceLogitGradient(const VecX& logits, const VecX& labels);

struct HeadTrainConfig {
    int epochs = 300;
    int batch = 1000;
    double learningRate = 1e-2;
    double validationFraction = 0.1;
    std::uint64_t seed = 0;
    bool allowEmptyOracle = false;
};

struct TrainReport {
    std::vector<double> trainLoss;      // mean BCE per sample of each epoch's batch
    std::vector<double> validationLoss; // mean BCE per sample
    std::vector<double> validationAccuracy;
    int epochs = 0;
    int batch = 0;
    std::uint64_t seed = 0;

    double finalAccuracy() const { return validationAccuracy.empty() ? 0.0 : validationAccuracy.back(); }
    /// Mean validation accuracy over the last n epochs.
    double trailingAccuracy(std::size_t n = 100) const;
};

/// One fresh batch of oracle-labelled samples per epoch, BCE, Adam on the head layers only.
/// Validation samples come from a separate seed stream and are fixed for the run.
TrainReport trainHead(HeadModel& head, const OccupancyOracle& oracle, const HeadTrainConfig& cfg);

/// Accuracy of lambda >= 0.5 against labels.
double headAccuracy(const HeadModel& head, const std::vector<TrainingSample>& samples);

struct DepthResult {
    int depth;
    TrainReport report;
    HeadModel head;
};

/// One head per depth, identical budgets and seeds.
std::vector<DepthResult> depthSweep(const DensityBackbone& backbone, const OccupancyOracle& oracle,
                                    const std::vector<int>& depths, const HeadConfig& headCfg,
                                    const HeadTrainConfig& trainCfg);

/// Baseline: same truncated backbone with a linear output regressed onto the distance by MSE.
class NaiveEsdfRegressor {
public:
    NaiveEsdfRegressor(TruncatedBackbone features, MlpNetwork output);
    static NaiveEsdfRegressor create(const DensityBackbone& backbone, int depth);

    double distance(const Vec3& q) const;
    VecX distance(const MatX& positions) const;
    const MlpNetwork& output() const { return output_; }

private:
    friend std::vector<double> trainNaiveBaseline(NaiveEsdfRegressor&, const AnalyticScene&, const HeadTrainConfig&);
    TruncatedBackbone features_;
    MlpNetwork output_;
};

/// MSE training against the analytic distance; returns the per-epoch loss.
std::vector<double> trainNaiveBaseline(NaiveEsdfRegressor& model, const AnalyticScene& scene,
                                       const HeadTrainConfig& cfg);

} // namespace nesdf
