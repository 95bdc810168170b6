#include <cmath>
#include <stdexcept>

#include "imputer/nnkit/layers.hpp"

namespace imputer::nn {

Dense::Dense(int inputs, int outputs, Activation act) : activation(act) {
    if (inputs < 1 || outputs < 1) throw std::invalid_argument("Dense: sizes must be positive");
    weight = Matrix::Zero(outputs, inputs);
    bias = Matrix::Zero(outputs, 1);
    grad_weight = Matrix::Zero(outputs, inputs);
    grad_bias = Matrix::Zero(outputs, 1);
}

void Dense::init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(weight.cols()));
    for (Eigen::Index j = 0; j < weight.cols(); ++j) {
        for (Eigen::Index i = 0; i < weight.rows(); ++i) weight(i, j) = rng.uniform(-bound, bound);
    }
    for (Eigen::Index i = 0; i < bias.rows(); ++i) bias(i, 0) = rng.uniform(-bound, bound);
}

Matrix Dense::forward(const Matrix& x, Cache* cache) const {
    if (x.rows() != weight.cols()) throw std::invalid_argument("Dense::forward: input size mismatch");
    Matrix pre = weight * x;
    pre.colwise() += bias.col(0);
    Matrix y = activation == Activation::relu ? Matrix(pre.cwiseMax(0.0)) : pre;
    if (cache != nullptr) {
        cache->input = x;
        cache->pre = std::move(pre);
    }
    return y;
}

Matrix Dense::backward(const Matrix& dy, const Cache& cache, bool need_input_grad) {
    Matrix dpre = dy;
    if (activation == Activation::relu) dpre = (cache.pre.array() > 0.0).select(dy, 0.0);
    grad_weight.noalias() += dpre * cache.input.transpose();
    grad_bias += dpre.rowwise().sum();
    if (!need_input_grad) return {};
    return weight.transpose() * dpre;
}

void Dense::collect(const std::string& prefix, ParamList& out) {
    out.push_back({prefix + ".weight", &weight, &grad_weight});
    out.push_back({prefix + ".bias", &bias, &grad_bias});
}

}  // namespace imputer::nn
