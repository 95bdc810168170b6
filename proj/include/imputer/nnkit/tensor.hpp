#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace imputer::nn {

// Column-major; one column per sample throughout the toolkit.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Array = Eigen::ArrayXXd;

enum class Activation { identity, relu };

/// tanh through the vectorized exp; absolute error stays near machine epsilon.
inline Array tanh_array(const Array& z) {
    const Array e = (2.0 * z.min(40.0).max(-40.0)).exp();
    return 1.0 - 2.0 / (e + 1.0);
}

inline Array sigmoid_array(const Array& z) { return 1.0 / (1.0 + (-z).exp()); }

/// Named view of a trainable tensor and its gradient accumulator.
struct ParamRef {
    std::string name;
    Matrix* value = nullptr;
    Matrix* grad = nullptr;
};

using ParamList = std::vector<ParamRef>;

inline void zero_grads(const ParamList& params) {
    for (const ParamRef& p : params) p.grad->setZero();
}

inline std::size_t parameter_count(const ParamList& params) {
    std::size_t n = 0;
    for (const ParamRef& p : params) n += static_cast<std::size_t>(p.value->size());
    return n;
}

}  // namespace imputer::nn
