#include "nesdf/adam.hpp"

#include <string>

namespace nesdf {

AdamState makeAdamState(const MlpNetwork& net, const AdamParameters& params)
{
    AdamState s;
    s.params = params;
    for (const auto& l : net.layers()) {
        s.firstMoment.push_back(MatX::Zero(l.rows(), l.cols()));
        s.secondMoment.push_back(MatX::Zero(l.rows(), l.cols()));
        s.firstMoment.push_back(MatX::Zero(l.rows(), 1));
        s.secondMoment.push_back(MatX::Zero(l.rows(), 1));
    }
    return s;
}

AdamState makeAdamState(const std::vector<MatX>& blocks, const AdamParameters& params)
{
    AdamState s;
    s.params = params;
    for (const auto& b : blocks) {
        s.firstMoment.push_back(MatX::Zero(b.rows(), b.cols()));
        s.secondMoment.push_back(MatX::Zero(b.rows(), b.cols()));
    }
    return s;
}

namespace {

void requireShape(const MatX& moment, Eigen::Index rows, Eigen::Index cols, std::size_t block)
{
    if (moment.rows() != rows || moment.cols() != cols)
        throw StructuralError("adam: shape mismatch in parameter block " + std::to_string(block));
}

} // namespace

void adamStep(MlpNetwork& net, const std::vector<LayerGradient>& grads, AdamState& state)
{
    auto& layers = net.mutableLayers();
    if (grads.size() != layers.size() || state.firstMoment.size() != 2 * layers.size())
        throw StructuralError("adam: layer count mismatch");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        requireShape(state.firstMoment[2 * i], grads[i].weight.rows(), grads[i].weight.cols(), 2 * i);
        requireShape(state.firstMoment[2 * i], layers[i].rows(), layers[i].cols(), 2 * i);
        requireShape(state.firstMoment[2 * i + 1], grads[i].bias.rows(), 1, 2 * i + 1);
    }
    const std::uint64_t t = ++state.stepCount;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        adamUpdate(layers[i].weight, grads[i].weight, state.firstMoment[2 * i], state.secondMoment[2 * i], t,
                   state.params);
        adamUpdate(layers[i].bias, grads[i].bias, state.firstMoment[2 * i + 1], state.secondMoment[2 * i + 1], t,
                   state.params);
    }
}

void adamStep(std::vector<MatX>& params, const std::vector<MatX>& grads, AdamState& state)
{
    if (params.size() != grads.size() || state.firstMoment.size() != params.size())
        throw StructuralError("adam: block count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        requireShape(state.firstMoment[i], params[i].rows(), params[i].cols(), i);
        requireShape(state.firstMoment[i], grads[i].rows(), grads[i].cols(), i);
    }
    const std::uint64_t t = ++state.stepCount;
    for (std::size_t i = 0; i < params.size(); ++i)
        adamUpdate(params[i], grads[i], state.firstMoment[i], state.secondMoment[i], t, state.params);
}

} // namespace nesdf
