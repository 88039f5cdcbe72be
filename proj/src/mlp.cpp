#include "nesdf/mlp.hpp"
#include "nesdf/rng.hpp"

#include <cmath>
#include <string>

namespace nesdf {

struct TapeAccess {
    static Tape make(const MlpNetwork& net, MatX input)
    {
        Tape t;
        t.net_ = &net;
        t.input_ = std::move(input);
        t.outputs_.reserve(net.layerCount());
        return t;
    }
    static std::vector<MatX>& outputs(Tape& t) { return t.outputs_; }
    static const MatX& input(const Tape& t) { return t.input_; }
    static const MlpNetwork* net(const Tape& t) { return t.net_; }
    static void consume(Tape& t) { t.consumed_ = true; }
};

double sigmoid(double x)
{
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logSigmoid(double x)
{
    if (x >= 0.0)
        return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double softplus(double x)
{
    if (x > 0.0)
        return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

MlpNetwork::MlpNetwork(int inputDim, std::vector<DenseLayer> layers, std::optional<std::size_t> skipLayer)
    : inputDim_(inputDim), layers_(std::move(layers)), skipLayer_(skipLayer)
{
    validate();
}

MlpNetwork MlpNetwork::unchecked(int inputDim, std::vector<DenseLayer> layers, std::optional<std::size_t> skipLayer)
{
    MlpNetwork n;
    n.inputDim_ = inputDim;
    n.layers_ = std::move(layers);
    n.skipLayer_ = skipLayer;
    return n;
}

int MlpNetwork::outputDim() const
{
    return layers_.empty() ? inputDim_ : static_cast<int>(layers_.back().rows());
}

MlpNetwork MlpNetwork::truncated(std::size_t k) const
{
    if (k > layers_.size())
        throw DomainError("truncate: depth " + std::to_string(k) + " exceeds layer count");
    std::vector<DenseLayer> kept(layers_.begin(), layers_.begin() + static_cast<std::ptrdiff_t>(k));
    std::optional<std::size_t> skip = (skipLayer_ && *skipLayer_ < k) ? skipLayer_ : std::nullopt;
    return MlpNetwork(inputDim_, std::move(kept), skip);
}

std::size_t MlpNetwork::parameterCount() const
{
    std::size_t n = 0;
    for (const auto& l : layers_)
        n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

void MlpNetwork::validate() const
{
    if (inputDim_ <= 0)
        throw StructuralError("mlp: input dimension must be positive");
    if (skipLayer_ && (*skipLayer_ == 0 || *skipLayer_ >= layers_.size()))
        throw StructuralError("mlp: skip layer index out of range");
    Eigen::Index expected = inputDim_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& l = layers_[i];
        const Eigen::Index cols = expected + ((skipLayer_ && *skipLayer_ == i) ? inputDim_ : 0);
        if (l.cols() != cols)
            throw StructuralError("mlp: layer " + std::to_string(i) + " has " + std::to_string(l.cols()) +
                                  " columns, expected " + std::to_string(cols));
        if (l.bias.size() != l.rows())
            throw StructuralError("mlp: layer " + std::to_string(i) + " bias length mismatch");
        if (!l.weight.allFinite() || !l.bias.allFinite())
            throw StructuralError("mlp: layer " + std::to_string(i) + " has non-finite parameters");
        switch (l.activation) {
        case Activation::Relu:
        case Activation::Identity:
        case Activation::Sigmoid:
            break;
        default:
            throw StructuralError("mlp: unknown activation");
        }
        expected = l.rows();
    }
}

namespace {

void activate(MatX& z, Activation a)
{
    switch (a) {
    case Activation::Relu:
        z = z.cwiseMax(0.0);
        break;
    case Activation::Identity:
        break;
    case Activation::Sigmoid:
        z = z.unaryExpr([](double v) { return sigmoid(v); });
        break;
    }
}

// dL/dz from dL/dy, given y = act(z)
void activationBackward(MatX& grad, const MatX& y, Activation a)
{
    switch (a) {
    case Activation::Relu:
        // derivative is 0 at exactly 0
        grad = (y.array() > 0.0).select(grad, 0.0);
        break;
    case Activation::Identity:
        break;
    case Activation::Sigmoid:
        grad.array() *= y.array() * (1.0 - y.array());
        break;
    }
}

MatX layerInput(const MlpNetwork& net, std::size_t i, const MatX& prev, const MatX& netInput)
{
    if (net.skipLayer() && *net.skipLayer() == i) {
        MatX stacked(prev.rows() + netInput.rows(), prev.cols());
        stacked << prev, netInput;
        return stacked;
    }
    return prev;
}

void checkInput(const MlpNetwork& net, Eigen::Index rows)
{
    if (rows != net.inputDim())
        throw StructuralError("forward: input dimension " + std::to_string(rows) + " does not match network input " +
                              std::to_string(net.inputDim()));
}

} // namespace

MatX evaluate(const MlpNetwork& net, const Eigen::Ref<const MatX>& inputs)
{
    checkInput(net, inputs.rows());
    MatX x = inputs;
    for (std::size_t i = 0; i < net.layerCount(); ++i) {
        const auto& l = net.layer(i);
        MatX z;
        if (net.skipLayer() && *net.skipLayer() == i)
            z = l.weight * layerInput(net, i, x, inputs);
        else
            z = l.weight * x;
        z.colwise() += l.bias;
        activate(z, l.activation);
        x = std::move(z);
    }
    return x;
}

BatchForwardResult forwardBatch(const MlpNetwork& net, const Eigen::Ref<const MatX>& inputs)
{
    checkInput(net, inputs.rows());
    Tape tape = TapeAccess::make(net, inputs);
    auto& outs = TapeAccess::outputs(tape);
    const MatX& in = TapeAccess::input(tape);
    for (std::size_t i = 0; i < net.layerCount(); ++i) {
        const auto& l = net.layer(i);
        const MatX& prev = i == 0 ? in : outs.back();
        MatX z = l.weight * layerInput(net, i, prev, in);
        z.colwise() += l.bias;
        activate(z, l.activation);
        outs.push_back(std::move(z));
    }
    MatX output = outs.empty() ? in : outs.back();
    return {std::move(output), std::move(tape)};
}

ForwardResult forward(const MlpNetwork& net, const Eigen::Ref<const VecX>& input)
{
    auto r = forwardBatch(net, input);
    return {r.output.col(0), std::move(r.tape)};
}

Gradients backward(Tape& tape, const Eigen::Ref<const MatX>& outputSeed, const BackwardOptions& options)
{
    if (tape.consumed())
        throw UsageError("backward: tape already consumed");
    const MlpNetwork* net = TapeAccess::net(tape);
    if (net == nullptr)
        throw UsageError("backward: empty tape");
    const auto& outs = TapeAccess::outputs(tape);
    const MatX& in = TapeAccess::input(tape);
    if (outputSeed.rows() != net->outputDim() || outputSeed.cols() != in.cols())
        throw StructuralError("backward: seed shape does not match network output");
    TapeAccess::consume(tape);

    Gradients g;
    if (options.parameterGradient)
        g.layers.resize(net->layerCount());
    MatX grad = outputSeed;
    MatX skipGrad; // contribution to the network input through the skip connection
    for (std::size_t idx = net->layerCount(); idx-- > 0;) {
        const auto& l = net->layer(idx);
        activationBackward(grad, outs[idx], l.activation);
        const MatX& prev = idx == 0 ? in : outs[idx - 1];
        const bool isSkip = net->skipLayer() && *net->skipLayer() == idx;
        if (options.parameterGradient) {
            g.layers[idx].bias = grad.rowwise().sum();
            if (isSkip)
                g.layers[idx].weight = grad * layerInput(*net, idx, prev, in).transpose();
            else
                g.layers[idx].weight = grad * prev.transpose();
        }
        if (idx == 0 && !options.inputGradient)
            break;
        MatX down = l.weight.transpose() * grad;
        if (isSkip) {
            skipGrad = down.bottomRows(in.rows());
            grad = down.topRows(prev.rows());
        } else {
            grad = std::move(down);
        }
    }
    if (options.inputGradient) {
        if (net->layerCount() == 0)
            grad = outputSeed;
        g.input = skipGrad.size() ? MatX(grad + skipGrad) : grad;
    }
    return g;
}

DenseLayer makeDenseLayer(int inputs, int outputs, Activation activation, std::uint64_t seed)
{
    Rng rng(seed);
    const double limit = std::sqrt(6.0 / static_cast<double>(inputs + outputs));
    DenseLayer l;
    l.weight.resize(outputs, inputs);
    for (Eigen::Index j = 0; j < l.weight.cols(); ++j)
        for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
            l.weight(i, j) = rng.uniform(-limit, limit);
    l.bias = VecX::Zero(outputs);
    l.activation = activation;
    return l;
}

} // namespace nesdf
