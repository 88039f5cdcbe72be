#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace nesdf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Error taxonomy. The CLI maps these onto its exit codes.

/// Value outside the admissible domain of an operation (non-finite input, bad radius, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Shapes or dimensions that do not fit together.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// API misuse, e.g. running backward twice on the same tape.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Training produced a non-finite loss.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or mismatching binary file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline bool allFinite(const Eigen::Ref<const MatX>& m) { return m.allFinite(); }

} // namespace nesdf
