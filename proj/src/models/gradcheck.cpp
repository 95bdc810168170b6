#include "imputer/models.hpp"

namespace imputer {

nn::GradCheckReport gradcheck_model(ModelKind kind, std::uint64_t seed, double tolerance) {
    ModelConfig cfg;
    cfg.window = 3;
    cfg.input = 6;
    cfg.h1 = 8;
    cfg.h2 = 5;
    cfg.h3 = 6;
    cfg.h4 = 3;
    NeuralImputer model(kind, cfg);
    model.init(seed);
    // small positive head bias offsets keep outputs away from the ReLU kink
    model.head.bias.setConstant(0.6);

    Rng rng(SeedTree(seed).child("gradcheck-data"));
    constexpr int kEvents = 2;
    constexpr int kNodes = 4;
    constexpr int kCols = kEvents * kNodes;
    Batch b;
    b.events = kEvents;
    b.nodes = kNodes;
    for (int i = 0; i < cfg.window; ++i) {
        nn::Matrix x(cfg.input, kCols);
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) = rng.uniform(-1.0, 1.0);
        }
        b.steps.push_back(std::move(x));
    }
    b.gap_forward = nn::Matrix::Zero(cfg.window, kCols);
    b.gap_backward = nn::Matrix::Zero(cfg.window, kCols);
    for (int e = 0; e < kEvents; ++e) {
        for (int i = 1; i < cfg.window; ++i) {
            const double gap = rng.uniform(0.0, 4.0);
            b.gap_forward.block(i, e * kNodes, 1, kNodes).setConstant(gap);
            b.gap_backward.block(i - 1, e * kNodes, 1, kNodes).setConstant(gap);
        }
    }
    b.target.resize(2, kCols);
    for (Eigen::Index c = 0; c < kCols; ++c) {
        b.target(0, c) = rng.uniform(0.0, kPitchLength);
        b.target(1, c) = rng.uniform(0.0, kPitchWidth);
    }
    const ScalerParams scalers;  // raw pitch extents

    const nn::ParamList params = model.params();
    auto loss = [&] { return metre_loss(model.forward(b), b.target, scalers, kNodes).value; };
    auto gradients = [&] {
        nn::zero_grads(params);
        NeuralImputer::Cache cache;
        const nn::Matrix out = model.forward(b, &cache);
        model.backward(b, cache, metre_loss(out, b.target, scalers, kNodes).grad);
    };
    return nn::grad_check(params, loss, gradients, tolerance);
}

}  // namespace imputer
