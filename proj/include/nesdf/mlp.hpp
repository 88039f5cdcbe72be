#pragma once

#include "nesdf/common.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nesdf {

enum class Activation : std::uint8_t { Relu = 0, Identity = 1, Sigmoid = 2 };

struct DenseLayer {
    MatX weight; // rows x cols
    VecX bias;   // rows
    Activation activation = Activation::Relu;

    Eigen::Index rows() const { return weight.rows(); }
    Eigen::Index cols() const { return weight.cols(); }

    /// Exact (bitwise-value) equality.
    bool operator==(const DenseLayer& o) const
    {
        return activation == o.activation && weight.rows() == o.weight.rows() && weight.cols() == o.weight.cols() &&
               bias.size() == o.bias.size() && weight == o.weight && bias == o.bias;
    }
};

/// Fixed-architecture fully connected network.
///
/// When skipLayer is set, that layer consumes [previous activation; network input],
/// the skip connection of the original NeRF trunk.
class MlpNetwork {
public:
    MlpNetwork() = default;
    MlpNetwork(int inputDim, std::vector<DenseLayer> layers, std::optional<std::size_t> skipLayer = std::nullopt);

    int inputDim() const { return inputDim_; }
    int outputDim() const;
    std::size_t layerCount() const { return layers_.size(); }
    std::optional<std::size_t> skipLayer() const { return skipLayer_; }

    const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    /// Mutable access for optimizers. Shapes must be left untouched.
    std::vector<DenseLayer>& mutableLayers() { return layers_; }

    /// Skips validation; used by readers that learn the skip index later. Call validate() afterwards.
    static MlpNetwork unchecked(int inputDim, std::vector<DenseLayer> layers,
                                std::optional<std::size_t> skipLayer = std::nullopt);

    /// Network made of the first k layers.
    MlpNetwork truncated(std::size_t k) const;

    std::size_t parameterCount() const;

    /// Throws StructuralError when the layer chain is inconsistent or weights are non-finite.
    void validate() const;

    bool operator==(const MlpNetwork&) const = default;

private:
    int inputDim_ = 0;
    std::vector<DenseLayer> layers_;
    std::optional<std::size_t> skipLayer_;
};

/// Activations recorded by one forward pass. Backward consumes it.
class Tape {
public:
    bool consumed() const { return consumed_; }
    Eigen::Index batchSize() const { return input_.cols(); }

private:
    friend struct TapeAccess;
    const MlpNetwork* net_ = nullptr;
    MatX input_;
    std::vector<MatX> outputs_; // post-activation, one per layer
    bool consumed_ = false;
};

struct ForwardResult {
    VecX output;
    Tape tape;
};

struct BatchForwardResult {
    MatX output;
    Tape tape;
};

struct LayerGradient {
    MatX weight;
    VecX bias;
};

struct Gradients {
    MatX input;                        // inputDim x batch; empty when not requested
    std::vector<LayerGradient> layers; // summed over the batch; empty when not requested
};

struct BackwardOptions {
    bool inputGradient = true;
    bool parameterGradient = true;
};

/// The tape keeps a pointer to net; net must outlive it.
ForwardResult forward(const MlpNetwork& net, const Eigen::Ref<const VecX>& input);
BatchForwardResult forwardBatch(const MlpNetwork& net, const Eigen::Ref<const MatX>& inputs);

/// Tape-free evaluation, columns are samples.
MatX evaluate(const MlpNetwork& net, const Eigen::Ref<const MatX>& inputs);

/// Reverse-mode gradients of sum_j seed_j^T output_j. Throws UsageError if the tape was already used.
Gradients backward(Tape& tape, const Eigen::Ref<const MatX>& outputSeed, const BackwardOptions& options = {});

/// Glorot-uniform weights, zero biases.
DenseLayer makeDenseLayer(int inputs, int outputs, Activation activation, std::uint64_t seed);

double sigmoid(double x);
/// log(sigmoid(x)) without overflow.
double logSigmoid(double x);
double softplus(double x);

} // namespace nesdf
