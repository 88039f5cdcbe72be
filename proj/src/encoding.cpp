#include "nesdf/encoding.hpp"

#include <cmath>
#include <numbers>

namespace nesdf {

namespace {

void requireFinite(const Eigen::Ref<const VecX>& p)
{
    if (!p.allFinite())
        throw DomainError("encode: non-finite input coordinate");
}

void requireConfig(const PositionalEncoding& cfg)
{
    if (cfg.numFrequencies < 0)
        throw StructuralError("encode: negative frequency count");
}

} // namespace

VecX encode(const Eigen::Ref<const VecX>& p, const PositionalEncoding& cfg)
{
    requireConfig(cfg);
    requireFinite(p);
    const auto dim = static_cast<int>(p.size());
    VecX out(cfg.outputDim(dim));
    int row = 0;
    if (cfg.includeInput) {
        out.head(dim) = p;
        row = dim;
    }
    double freq = std::numbers::pi;
    for (int k = 0; k < cfg.numFrequencies; ++k, freq *= 2.0) {
        for (int i = 0; i < dim; ++i) {
            out[row++] = std::sin(freq * p[i]);
            out[row++] = std::cos(freq * p[i]);
        }
    }
    return out;
}

MatX encodeBatch(const Eigen::Ref<const MatX>& points, const PositionalEncoding& cfg)
{
    requireConfig(cfg);
    const auto dim = static_cast<int>(points.rows());
    MatX out(cfg.outputDim(dim), points.cols());
    for (Eigen::Index j = 0; j < points.cols(); ++j)
        out.col(j) = encode(points.col(j), cfg);
    return out;
}

MatX encodeJacobian(const Eigen::Ref<const VecX>& p, const PositionalEncoding& cfg)
{
    requireConfig(cfg);
    requireFinite(p);
    const auto dim = static_cast<int>(p.size());
    MatX jac = MatX::Zero(cfg.outputDim(dim), dim);
    int row = 0;
    if (cfg.includeInput) {
        jac.topRows(dim).setIdentity();
        row = dim;
    }
    double freq = std::numbers::pi;
    for (int k = 0; k < cfg.numFrequencies; ++k, freq *= 2.0) {
        for (int i = 0; i < dim; ++i) {
            jac(row++, i) = freq * std::cos(freq * p[i]);
            jac(row++, i) = -freq * std::sin(freq * p[i]);
        }
    }
    return jac;
}

} // namespace nesdf
