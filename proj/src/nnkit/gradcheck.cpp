#include <algorithm>
#include <cmath>

#include "imputer/nnkit/optim.hpp"

namespace imputer::nn {

GradCheckReport grad_check(const ParamList& params, const std::function<double()>& loss,
                           const std::function<void()>& gradients, double tolerance, double step) {
    gradients();
    std::vector<Matrix> analytic;
    analytic.reserve(params.size());
    for (const ParamRef& p : params) analytic.push_back(*p.grad);

    GradCheckReport report;
    report.tolerance = tolerance;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Matrix& w = *params[k].value;
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            for (Eigen::Index i = 0; i < w.rows(); ++i) {
                const double saved = w(i, j);
                w(i, j) = saved + step;
                const double up = loss();
                w(i, j) = saved - step;
                const double down = loss();
                w(i, j) = saved;

                const double numeric = (up - down) / (2.0 * step);
                const double a = analytic[k](i, j);
                const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
                const double rel = std::abs(a - numeric) / denom;
                report.max_rel_error = std::max(report.max_rel_error, rel);
                ++report.checked;
                if (rel >= tolerance) report.failures.push_back({params[k].name, i, j, a, numeric, rel});
            }
        }
    }
    return report;
}

}  // namespace imputer::nn
