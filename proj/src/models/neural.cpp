#include <cmath>
#include <stdexcept>
#include <string>

#include "imputer/models.hpp"

namespace imputer {

std::string_view model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::baseline1: return "baseline1";
        case ModelKind::baseline2: return "baseline2";
        case ModelKind::baseline3: return "baseline3";
        case ModelKind::tlstm: return "tlstm";
        case ModelKind::gnn: return "gnn";
        case ModelKind::agent_imputer: return "agent_imputer";
    }
    return "?";
}

ModelKind parse_model(std::string_view name) {
    for (const ModelKind k : kAllModels) {
        if (model_name(k) == name) return k;
    }
    throw std::invalid_argument("unknown model kind: " + std::string(name));
}

void ModelConfig::validate() const {
    if (window < 1 || window % 2 == 0) throw std::invalid_argument("ModelConfig: window must be odd and positive");
    if (input < 1 || batch < 1 || micro_batch < 1 || h2 < 1 || h3 < 1 || h4 < 1 || epochs < 0) {
        throw std::invalid_argument("ModelConfig: sizes must be positive");
    }
    if (h1 < 2 || h1 % 2 != 0) throw std::invalid_argument("ModelConfig: h1 must be even (two directions)");
    if (!(lr >= 0.0) || !(weight_decay >= 0.0)) throw std::invalid_argument("ModelConfig: negative lr or decay");
}

namespace {

bool has_encoder(ModelKind k) { return k == ModelKind::tlstm || k == ModelKind::agent_imputer; }
bool has_graph(ModelKind k) { return k == ModelKind::gnn || k == ModelKind::agent_imputer; }

}  // namespace

NeuralImputer::NeuralImputer(ModelKind kind, const ModelConfig& config) : kind_(kind), config_(config) {
    if (!is_neural(kind)) throw std::invalid_argument("NeuralImputer: baselines have no parameters");
    config.validate();
    int width = config.input;
    if (has_encoder(kind)) {
        encoder = nn::BiTLSTM(config.input, config.h1 / 2);
        dense = nn::Dense(config.h1, config.h2, nn::Activation::relu);
        width = config.h2;
    }
    if (has_graph(kind)) {
        sage1 = nn::SageLayer(width, config.h3, nn::Activation::relu);
        sage2 = nn::SageLayer(config.h3, config.h4, nn::Activation::identity);
        width = config.h4;
    }
    head = nn::Dense(width, 2, nn::Activation::relu);
}

void NeuralImputer::init(std::uint64_t seed) {
    Rng rng(SeedTree(seed).child("init"));
    if (has_encoder(kind_)) {
        encoder.init(rng);
        dense.init(rng);
    }
    if (has_graph(kind_)) {
        sage1.init(rng);
        sage2.init(rng);
    }
    head.init(rng);
    // centre of the normalized pitch, so the final ReLU starts active
    head.bias.setConstant(0.5);
}

nn::Matrix NeuralImputer::forward(const Batch& batch, Cache* cache) const {
    if (static_cast<int>(batch.steps.size()) != config_.window) {
        throw std::invalid_argument("NeuralImputer::forward: window length mismatch");
    }
    nn::Matrix x;
    if (has_encoder(kind_)) {
        const nn::Matrix enc = encoder.encode_middle(batch.steps, batch.gap_forward, batch.gap_backward,
                                                     cache != nullptr ? &cache->encoder : nullptr);
        x = dense.forward(enc, cache != nullptr ? &cache->dense : nullptr);
    } else {
        x = batch.steps[batch.steps.size() / 2];
    }
    if (has_graph(kind_)) {
        x = sage1.forward(x, batch.nodes, cache != nullptr ? &cache->sage1 : nullptr);
        x = sage2.forward(x, batch.nodes, cache != nullptr ? &cache->sage2 : nullptr);
    }
    return head.forward(x, cache != nullptr ? &cache->head : nullptr);
}

void NeuralImputer::backward(const Batch& batch, const Cache& cache, const nn::Matrix& d_out) {
    const bool encoder_follows = has_encoder(kind_);
    nn::Matrix d = head.backward(d_out, cache.head, true);
    if (has_graph(kind_)) {
        d = sage2.backward(d, cache.sage2, batch.nodes, true);
        d = sage1.backward(d, cache.sage1, batch.nodes, encoder_follows);
    }
    if (encoder_follows) {
        const nn::Matrix d_enc = dense.backward(d, cache.dense, true);
        encoder.backward_middle(cache.encoder, d_enc);
    }
}

nn::ParamList NeuralImputer::params() {
    nn::ParamList out;
    if (has_encoder(kind_)) {
        encoder.collect("encoder", out);
        dense.collect("dense", out);
    }
    if (has_graph(kind_)) {
        sage1.collect("sage1", out);
        sage2.collect("sage2", out);
    }
    head.collect("head", out);
    return out;
}

MetreLoss metre_loss(const nn::Matrix& output, const nn::Matrix& target, const ScalerParams& scalers, int nodes) {
    if (output.rows() != 2 || target.rows() != 2 || output.cols() != target.cols()) {
        throw std::invalid_argument("metre_loss: expected matching 2 x M matrices");
    }
    if (nodes < 1 || output.cols() % nodes != 0) throw std::invalid_argument("metre_loss: bad node count");
    const double sx = scalers.x_max - scalers.x_min;
    const double sy = scalers.y_max - scalers.y_min;
    nn::Matrix metres(2, output.cols());
    metres.row(0) = (output.row(0).array() * sx + scalers.x_min).matrix();
    metres.row(1) = (output.row(1).array() * sy + scalers.y_min).matrix();

    const nn::LossResult base = nn::euclidean_loss(metres, target);
    MetreLoss r;
    r.value = base.value;
    r.grad = base.grad;
    r.grad.row(0) *= sx;
    r.grad.row(1) *= sy;
    const Eigen::Index events = output.cols() / nodes;
    r.per_event.assign(static_cast<std::size_t>(events), 0.0);
    for (Eigen::Index b = 0; b < events; ++b) {
        double s = 0.0;
        for (Eigen::Index n = 0; n < nodes; ++n) {
            const Eigen::Index c = b * nodes + n;
            s += std::hypot(metres(0, c) - target(0, c), metres(1, c) - target(1, c));
        }
        r.per_event[static_cast<std::size_t>(b)] = s;
    }
    return r;
}

}  // namespace imputer
