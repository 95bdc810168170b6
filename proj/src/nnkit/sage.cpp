#include <cmath>
#include <stdexcept>

#include "imputer/nnkit/layers.hpp"

namespace imputer::nn {

Matrix neighbour_mean(const Matrix& x, int nodes) {
    if (nodes < 2) throw std::invalid_argument("neighbour_mean: graphs need at least two nodes");
    if (x.cols() % nodes != 0) throw std::invalid_argument("neighbour_mean: columns not a multiple of nodes");
    const double inv = 1.0 / static_cast<double>(nodes - 1);
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index g = 0; g < x.cols(); g += nodes) {
        const Vector total = x.middleCols(g, nodes).rowwise().sum();
        out.middleCols(g, nodes) = ((-x.middleCols(g, nodes)).colwise() + total) * inv;
    }
    return out;
}

SageLayer::SageLayer(int inputs, int outputs, Activation act) : activation(act) {
    if (inputs < 1 || outputs < 1) throw std::invalid_argument("SageLayer: sizes must be positive");
    w_root = Matrix::Zero(outputs, inputs);
    w_neigh = Matrix::Zero(outputs, inputs);
    bias = Matrix::Zero(outputs, 1);
    grad_w_root = Matrix::Zero(outputs, inputs);
    grad_w_neigh = Matrix::Zero(outputs, inputs);
    grad_bias = Matrix::Zero(outputs, 1);
}

void SageLayer::init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w_root.cols()));
    for (Matrix* m : {&w_root, &w_neigh, &bias}) {
        for (Eigen::Index j = 0; j < m->cols(); ++j) {
            for (Eigen::Index i = 0; i < m->rows(); ++i) (*m)(i, j) = rng.uniform(-bound, bound);
        }
    }
}

Matrix SageLayer::forward(const Matrix& x, int nodes, Cache* cache) const {
    if (x.rows() != w_root.cols()) throw std::invalid_argument("SageLayer::forward: input size mismatch");
    Matrix neigh = neighbour_mean(x, nodes);
    Matrix pre = w_root * x;
    pre.noalias() += w_neigh * neigh;
    pre.colwise() += bias.col(0);
    Matrix y = activation == Activation::relu ? Matrix(pre.cwiseMax(0.0)) : pre;
    if (cache != nullptr) {
        cache->input = x;
        cache->neighbours = std::move(neigh);
        cache->pre = std::move(pre);
    }
    return y;
}

Matrix SageLayer::backward(const Matrix& dy, const Cache& cache, int nodes, bool need_input_grad) {
    Matrix dpre = dy;
    if (activation == Activation::relu) dpre = (cache.pre.array() > 0.0).select(dy, 0.0);
    grad_w_root.noalias() += dpre * cache.input.transpose();
    grad_w_neigh.noalias() += dpre * cache.neighbours.transpose();
    grad_bias += dpre.rowwise().sum();
    if (!need_input_grad) return {};
    Matrix dx = w_root.transpose() * dpre;
    dx += neighbour_mean(w_neigh.transpose() * dpre, nodes);
    return dx;
}

void SageLayer::collect(const std::string& prefix, ParamList& out) {
    out.push_back({prefix + ".w_root", &w_root, &grad_w_root});
    out.push_back({prefix + ".w_neigh", &w_neigh, &grad_w_neigh});
    out.push_back({prefix + ".bias", &bias, &grad_bias});
}

}  // namespace imputer::nn
