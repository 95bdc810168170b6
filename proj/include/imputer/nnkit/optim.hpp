#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "imputer/nnkit/tensor.hpp"

namespace imputer::nn {

struct LossResult {
    double value = 0.0;
    Matrix grad;  // d value / d pred, same shape as pred
};

/// Mean Euclidean distance between columns of two 2 x M matrices.
/// The gradient of a zero-length residual is taken as 0.
LossResult euclidean_loss(const Matrix& pred, const Matrix& target);

struct AdamWConfig {
    double lr = 0.002;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

/// Adam with decoupled weight decay. Moments are allocated on the first step.
class AdamW {
public:
    explicit AdamW(AdamWConfig config = {}) : config_(config) {}

    /// Throws NumericError naming the parameter if any gradient is non-finite.
    void step(const ParamList& params);

    std::int64_t steps() const { return step_; }
    const AdamWConfig& config() const { return config_; }
    const std::vector<Matrix>& first_moments() const { return m_; }
    const std::vector<Matrix>& second_moments() const { return v_; }

private:
    AdamWConfig config_;
    std::int64_t step_ = 0;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
};

/// Blob layout: 8-byte magic, u64 header length, JSON header, f64 payload
/// (little-endian, column-major, parameters in list order).
std::vector<std::uint8_t> serialize_params(const ParamList& params, std::uint64_t seed,
                                           const std::string& model_kind);

struct BlobHeader {
    int version = 0;
    std::uint64_t seed = 0;
    std::string model_kind;
    std::vector<std::string> names;
    std::vector<std::pair<long, long>> shapes;
};

/// Overwrites `params` in place; names and shapes must match exactly.
BlobHeader deserialize_params(const std::vector<std::uint8_t>& blob, const ParamList& params);

struct GradCheckEntry {
    std::string param;
    long row = 0;
    long col = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    double tolerance = 0.0;
    std::vector<GradCheckEntry> failures;
    bool passed() const { return failures.empty(); }
};

/// Central differences over every entry of `params`. `loss` evaluates the
/// objective; `gradients` must zero and fill the gradient accumulators.
GradCheckReport grad_check(const ParamList& params, const std::function<double()>& loss,
                           const std::function<void()>& gradients, double tolerance = 1e-4, double step = 1e-5);

/// Relative error with an absolute floor so that both-near-zero entries pass.
inline constexpr double kGradCheckFloor = 1e-6;

}  // namespace imputer::nn
