#pragma once

#include "nesdf/common.hpp"

namespace nesdf {

/// Fourier feature encoding of a normalized coordinate.
///
/// Layout for a D-dimensional input with L frequencies:
///   [p_0..p_{D-1}]                         (only when includeInput)
///   then for k = 0..L-1, for i = 0..D-1:   sin(2^k pi p_i), cos(2^k pi p_i)
struct PositionalEncoding {
    int numFrequencies = 10;
    bool includeInput = true;

    int outputDim(int inputDim) const { return inputDim * (2 * numFrequencies + (includeInput ? 1 : 0)); }
};

VecX encode(const Eigen::Ref<const VecX>& p, const PositionalEncoding& cfg);

/// Column-wise encoding of a batch (inputDim x n).
MatX encodeBatch(const Eigen::Ref<const MatX>& points, const PositionalEncoding& cfg);

/// d encode / d p, shape outputDim x inputDim.
MatX encodeJacobian(const Eigen::Ref<const VecX>& p, const PositionalEncoding& cfg);

} // namespace nesdf
