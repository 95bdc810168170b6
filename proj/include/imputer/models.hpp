#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "imputer/domain.hpp"
#include "imputer/features.hpp"
#include "imputer/nnkit/layers.hpp"
#include "imputer/nnkit/optim.hpp"
#include "imputer/synthgen.hpp"

namespace imputer {

enum class ModelKind { baseline1, baseline2, baseline3, tlstm, gnn, agent_imputer };

inline constexpr std::array<ModelKind, 6> kAllModels = {ModelKind::baseline1, ModelKind::baseline2,
                                                        ModelKind::baseline3, ModelKind::tlstm,
                                                        ModelKind::gnn,       ModelKind::agent_imputer};

std::string_view model_name(ModelKind kind);
ModelKind parse_model(std::string_view name);
inline bool is_neural(ModelKind kind) {
    return kind == ModelKind::tlstm || kind == ModelKind::gnn || kind == ModelKind::agent_imputer;
}

struct ModelConfig {
    int window = kDefaultWindow;  // L
    int input = kFeatureWidth;    // I
    int batch = 128;              // B, events per minibatch
    int micro_batch = 8;          // events per forward/backward slice; gradients summed to the full batch
    int h1 = 100;                 // bidirectional output (two directions of h1 / 2)
    int h2 = 50;
    int h3 = 64;
    int h4 = 32;
    int epochs = 150;
    double lr = 0.002;
    double weight_decay = 0.01;
    std::uint64_t seed = 7;
    bool eval_each_epoch = true;

    void validate() const;
};

// ---- baselines ---------------------------------------------------------------
// All three work in the agent's own-goal frame and map back to absolute
// coordinates with the attack direction of event t's period.

Point baseline1_predict(const MatchData& match, const ObservationIndex& index, std::size_t t, int n);
Point baseline2_predict(const MatchData& match, const ObservationIndex& index, std::size_t t, int n);
Point baseline3_predict(const MatchData& match, const ObservationIndex& index, std::size_t t, int n);

Point baseline1_predict(const MatchData& match, const ObservationMask& mask, std::size_t t, int n);
Point baseline2_predict(const MatchData& match, const ObservationMask& mask, std::size_t t, int n);
Point baseline3_predict(const MatchData& match, const ObservationMask& mask, std::size_t t, int n);

PredictionSet baseline_predict_match(ModelKind kind, const MatchData& match);

// ---- neural models -----------------------------------------------------------

/// A minibatch of events; column b * nodes + n holds agent n of event b.
struct Batch {
    int events = 0;
    int nodes = kNumAgents;
    std::vector<nn::Matrix> steps;  // L matrices, (I x events*nodes)
    nn::Matrix gap_forward;         // L x events*nodes
    nn::Matrix gap_backward;
    nn::Matrix target;              // 2 x events*nodes, own-goal frame metres
};

class NeuralImputer {
public:
    NeuralImputer(ModelKind kind, const ModelConfig& config);

    void init(std::uint64_t seed);

    struct Cache {
        nn::BiTLSTM::MiddleCache encoder;
        nn::Dense::Cache dense;
        nn::SageLayer::Cache sage1;
        nn::SageLayer::Cache sage2;
        nn::Dense::Cache head;
    };

    /// Raw head output in normalized own-goal coordinates (2 x columns).
    nn::Matrix forward(const Batch& batch, Cache* cache = nullptr) const;
    /// Accumulates gradients given dL/d(output).
    void backward(const Batch& batch, const Cache& cache, const nn::Matrix& d_out);

    nn::ParamList params();
    ModelKind kind() const { return kind_; }
    const ModelConfig& config() const { return config_; }

    nn::BiTLSTM encoder;
    nn::Dense dense;
    nn::SageLayer sage1;
    nn::SageLayer sage2;
    nn::Dense head;

private:
    ModelKind kind_;
    ModelConfig config_;
};

/// Inverse-scaled loss in metres: mean distance between scaled-back outputs and targets.
struct MetreLoss {
    double value = 0.0;
    std::vector<double> per_event;  // summed distance over the event's agents
    nn::Matrix grad;                // d value / d raw normalized output
};
MetreLoss metre_loss(const nn::Matrix& output, const nn::Matrix& target, const ScalerParams& scalers, int nodes);

// ---- fold preparation and training ---------------------------------------------

struct PreparedMatch {
    const MatchData* match = nullptr;
    ObservationMask mask;
    EncodedMatch encoded;
    std::vector<AgentPositions> target_own;  // [t][n] own-goal frame
};

struct FoldContext {
    ScalerParams scalers;
    EmbeddingTables tables;
    std::vector<PreparedMatch> train;
    std::vector<PreparedMatch> test;
};

/// Scalers are fitted on the training matches only.
FoldContext prepare_fold(const Dataset& dataset, const Fold& fold, const ModelConfig& config);
PreparedMatch prepare_match(const MatchData& match, const ScalerParams& scalers, const EmbeddingTables& tables);

struct SampleRef {
    std::uint32_t match = 0;
    std::uint32_t t = 0;
};

Batch build_batch(std::span<const PreparedMatch> matches, std::span<const SampleRef> samples, int window);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double test_loss = 0.0;
};

struct TrainResult {
    std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Deterministic given config.seed. Throws NumericError on divergence.
TrainResult train(NeuralImputer& model, const FoldContext& fold, const EpochCallback& on_epoch = {});

/// Mean metre loss of the model over every event of `matches` (unclamped output).
double evaluate_loss(const NeuralImputer& model, std::span<const PreparedMatch> matches, const ScalerParams& scalers,
                     int batch_size);

/// Predictions with outputs clamped to [0, 1] before inverse scaling.
PredictionSet predict(const NeuralImputer& model, const PreparedMatch& match, const ScalerParams& scalers);

// ---- cross validation -----------------------------------------------------------

struct FoldOutcome {
    int fold = 0;
    std::vector<PredictionSet> predictions;  // one per test match
    std::vector<EpochRecord> history;        // empty for baselines
};

/// Per-fold seed used for initialisation, embeddings and shuffling.
std::uint64_t fold_seed(std::uint64_t root, std::size_t fold);

/// Trains one fold from scratch and predicts its test matches.
struct FoldRun {
    FoldContext context;
    std::unique_ptr<NeuralImputer> model;
    TrainResult result;
    std::vector<PredictionSet> predictions;
};
FoldRun train_fold(const Dataset& dataset, std::size_t fold, ModelKind kind, const ModelConfig& config,
                   const EpochCallback& on_epoch = {});

/// Runs every fold for one model kind; folds may run on `threads` workers.
std::vector<FoldOutcome> cross_validate(const Dataset& dataset, ModelKind kind, const ModelConfig& config,
                                        int threads = 1);

/// mean and 1.96 * sample sd / sqrt(k); zero half-width when k < 2.
struct MeanCI {
    double mean = 0.0;
    double half_width = 0.0;
};
MeanCI mean_ci(std::span<const double> values);

/// Finite-difference check of a shrunken model (TLSTM hidden 4, L = 3, 4 nodes).
nn::GradCheckReport gradcheck_model(ModelKind kind, std::uint64_t seed, double tolerance = 1e-4);

}  // namespace imputer
