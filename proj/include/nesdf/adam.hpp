#pragma once

#include "nesdf/mlp.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace nesdf {

struct AdamParameters {
    double learningRate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Moments for a list of parameter blocks (one weight and one bias block per layer for networks).
struct AdamState {
    AdamParameters params;
    std::uint64_t stepCount = 0;
    std::vector<MatX> firstMoment;
    std::vector<MatX> secondMoment;
};

/// In-place bias-corrected Adam update of one block. t is the 1-based step index.
template <typename Derived, typename GradDerived>
void adamUpdate(Eigen::MatrixBase<Derived>& param, const Eigen::MatrixBase<GradDerived>& grad, MatX& m, MatX& v,
                std::uint64_t t, const AdamParameters& p)
{
    m = p.beta1 * m + (1.0 - p.beta1) * grad;
    v = p.beta2 * v + (1.0 - p.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(p.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(p.beta2, static_cast<double>(t));
    param.array() -= p.learningRate * (m.array() / c1) / ((v.array() / c2).sqrt() + p.epsilon);
}

AdamState makeAdamState(const MlpNetwork& net, const AdamParameters& params = {});
AdamState makeAdamState(const std::vector<MatX>& blocks, const AdamParameters& params = {});

/// One update of every layer of net.
void adamStep(MlpNetwork& net, const std::vector<LayerGradient>& grads, AdamState& state);

/// One update of free-standing parameter blocks.
void adamStep(std::vector<MatX>& params, const std::vector<MatX>& grads, AdamState& state);

} // namespace nesdf
