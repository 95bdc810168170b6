#include <cmath>
#include <stdexcept>

#include "imputer/nnkit/optim.hpp"

namespace imputer::nn {

LossResult euclidean_loss(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != 2 || target.rows() != 2 || pred.cols() != target.cols()) {
        throw std::invalid_argument("euclidean_loss: expected matching 2 x M matrices");
    }
    if (pred.cols() == 0) throw std::invalid_argument("euclidean_loss: empty batch");
    const auto m = static_cast<double>(pred.cols());
    LossResult r;
    r.grad = Matrix::Zero(2, pred.cols());
    double total = 0.0;
    for (Eigen::Index j = 0; j < pred.cols(); ++j) {
        const double dx = pred(0, j) - target(0, j);
        const double dy = pred(1, j) - target(1, j);
        const double d = std::hypot(dx, dy);
        total += d;
        if (d > 0.0) {
            r.grad(0, j) = dx / (d * m);
            r.grad(1, j) = dy / (d * m);
        }
    }
    r.value = total / m;
    return r;
}

}  // namespace imputer::nn
