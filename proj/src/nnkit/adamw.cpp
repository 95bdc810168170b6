#include <cmath>

#include "imputer/domain.hpp"
#include "imputer/nnkit/optim.hpp"

namespace imputer::nn {

void AdamW::step(const ParamList& params) {
    if (m_.empty()) {
        for (const ParamRef& p : params) {
            m_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
            v_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
        }
    }
    if (m_.size() != params.size()) throw std::invalid_argument("AdamW::step: parameter list changed");
    for (const ParamRef& p : params) {
        if (!p.grad->allFinite()) throw NumericError("non-finite gradient in " + p.name);
    }

    ++step_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    const double step_size = config_.lr / bc1;
    const double sqrt_bc2 = std::sqrt(bc2);

    for (std::size_t k = 0; k < params.size(); ++k) {
        Matrix& w = *params[k].value;
        const Matrix& g = *params[k].grad;
        Matrix& m = m_[k];
        Matrix& v = v_[k];
        if (m.rows() != w.rows() || m.cols() != w.cols()) {
            throw std::invalid_argument("AdamW::step: shape changed for " + params[k].name);
        }
        w *= 1.0 - config_.lr * config_.weight_decay;
        m = config_.beta1 * m + (1.0 - config_.beta1) * g;
        v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseProduct(g);
        const Array denom = v.array().sqrt() / sqrt_bc2 + config_.eps;
        w.array() -= step_size * m.array() / denom;
    }
}

}  // namespace imputer::nn
