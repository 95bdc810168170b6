#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "imputer/models.hpp"

namespace imputer {

PreparedMatch prepare_match(const MatchData& match, const ScalerParams& scalers, const EmbeddingTables& tables) {
    PreparedMatch p;
    p.match = &match;
    p.mask = build_observation_mask(match.events, match.roster);
    const auto rows = compute_match_features(match, p.mask);
    p.encoded = encode_match(match, rows, scalers, tables);
    p.target_own = align_events_to_tracking(match.events, match.tracking);
    for (std::size_t t = 0; t < match.events.size(); ++t) {
        for (int n = 0; n < kNumAgents; ++n) {
            Point& q = p.target_own[t][static_cast<std::size_t>(n)];
            q = to_own_goal_frame(q, match.direction_of_agent(n, match.events[t].period));
        }
    }
    return p;
}

FoldContext prepare_fold(const Dataset& dataset, const Fold& fold, const ModelConfig& config) {
    if (fold.train.empty()) throw std::invalid_argument("prepare_fold: empty training split");
    FoldContext ctx;
    std::vector<FeatureRow> pooled;
    for (const int m : fold.train) {
        const MatchData& match = dataset.matches.at(static_cast<std::size_t>(m));
        const auto rows = compute_match_features(match, build_observation_mask(match.events, match.roster));
        pooled.insert(pooled.end(), rows.begin(), rows.end());
    }
    ctx.scalers = fit_scalers(pooled);
    ctx.tables = EmbeddingTables::generate(SeedTree(config.seed).child("embeddings"));
    for (const int m : fold.train) {
        ctx.train.push_back(prepare_match(dataset.matches.at(static_cast<std::size_t>(m)), ctx.scalers, ctx.tables));
    }
    for (const int m : fold.test) {
        ctx.test.push_back(prepare_match(dataset.matches.at(static_cast<std::size_t>(m)), ctx.scalers, ctx.tables));
    }
    return ctx;
}

Batch build_batch(std::span<const PreparedMatch> matches, std::span<const SampleRef> samples, int window) {
    Batch b;
    b.events = static_cast<int>(samples.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(samples.size()) * kNumAgents;
    const auto L = static_cast<std::size_t>(window);
    b.steps.assign(L, nn::Matrix(kFeatureWidth, cols));
    b.gap_forward.resize(window, cols);
    b.gap_backward.resize(window, cols);
    b.target.resize(2, cols);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const PreparedMatch& pm = matches[samples[s].match];
        const std::size_t t = samples[s].t;
        const WindowSpec spec = window_spec(pm.encoded.times, t, window);
        const auto c0 = static_cast<Eigen::Index>(s) * kNumAgents;
        for (std::size_t i = 0; i < L; ++i) {
            for (int n = 0; n < kNumAgents; ++n) {
                b.steps[i].col(c0 + n) = Eigen::Map<const Eigen::VectorXd>(pm.encoded.row(spec.indices[i], n),
                                                                           kFeatureWidth);
            }
            b.gap_forward.row(static_cast<Eigen::Index>(i)).segment(c0, kNumAgents).setConstant(spec.gap_forward[i]);
            b.gap_backward.row(static_cast<Eigen::Index>(i)).segment(c0, kNumAgents).setConstant(spec.gap_backward[i]);
        }
        for (int n = 0; n < kNumAgents; ++n) {
            const Point q = pm.target_own[t][static_cast<std::size_t>(n)];
            b.target(0, c0 + n) = q.x;
            b.target(1, c0 + n) = q.y;
        }
    }
    return b;
}

namespace {

std::vector<SampleRef> all_samples(std::span<const PreparedMatch> matches) {
    std::vector<SampleRef> out;
    for (std::size_t m = 0; m < matches.size(); ++m) {
        for (std::size_t t = 0; t < matches[m].encoded.rows; ++t) {
            out.push_back({static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(t)});
        }
    }
    return out;
}

}  // namespace

double evaluate_loss(const NeuralImputer& model, std::span<const PreparedMatch> matches, const ScalerParams& scalers,
                     int batch_size) {
    const auto samples = all_samples(matches);
    if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    const auto step = static_cast<std::size_t>(std::max(1, batch_size));
    for (std::size_t s = 0; s < samples.size(); s += step) {
        const std::size_t e = std::min(samples.size(), s + step);
        const Batch b = build_batch(matches, std::span(samples).subspan(s, e - s), model.config().window);
        const MetreLoss loss = metre_loss(model.forward(b), b.target, scalers, b.nodes);
        for (const double v : loss.per_event) total += v;
    }
    return total / static_cast<double>(samples.size() * kNumAgents);
}

TrainResult train(NeuralImputer& model, const FoldContext& fold, const EpochCallback& on_epoch) {
    const ModelConfig& cfg = model.config();
    const auto samples = all_samples(fold.train);
    if (samples.empty()) throw std::invalid_argument("train: no training events");

    nn::AdamW optimizer(nn::AdamWConfig{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
    const nn::ParamList params = model.params();
    std::vector<std::size_t> order(samples.size());
    std::vector<double> sample_loss(samples.size());
    std::vector<SampleRef> picked;
    NeuralImputer::Cache cache;

    TrainResult result;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(SeedTree(cfg.seed).child("shuffle", static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);

        int batch_index = 0;
        for (std::size_t s = 0; s < order.size(); s += static_cast<std::size_t>(cfg.batch), ++batch_index) {
            const std::size_t e = std::min(order.size(), s + static_cast<std::size_t>(cfg.batch));
            nn::zero_grads(params);
            for (std::size_t ms = s; ms < e; ms += static_cast<std::size_t>(cfg.micro_batch)) {
                const std::size_t me = std::min(e, ms + static_cast<std::size_t>(cfg.micro_batch));
                picked.clear();
                for (std::size_t k = ms; k < me; ++k) picked.push_back(samples[order[k]]);
                const Batch b = build_batch(fold.train, picked, cfg.window);

                const nn::Matrix out = model.forward(b, &cache);
                MetreLoss loss = metre_loss(out, b.target, fold.scalers, b.nodes);
                if (!std::isfinite(loss.value)) {
                    throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                       std::to_string(batch_index) + " (" + std::string(model_name(model.kind())) +
                                       ")");
                }
                for (std::size_t k = ms; k < me; ++k) sample_loss[order[k]] = loss.per_event[k - ms];
                loss.grad *= static_cast<double>(me - ms) / static_cast<double>(e - s);
                model.backward(b, cache, loss.grad);
            }
            optimizer.step(params);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        double total = 0.0;
        for (const double v : sample_loss) total += v;
        rec.train_loss = total / static_cast<double>(samples.size() * kNumAgents);
        rec.test_loss = cfg.eval_each_epoch ? evaluate_loss(model, fold.test, fold.scalers, cfg.micro_batch)
                                            : std::numeric_limits<double>::quiet_NaN();
        result.history.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return result;
}

PredictionSet predict(const NeuralImputer& model, const PreparedMatch& match, const ScalerParams& scalers) {
    const MatchData& m = *match.match;
    PredictionSet out = PredictionSet::skeleton(m);
    const std::span<const PreparedMatch> one(&match, 1);
    const auto samples = all_samples(one);
    const auto B = static_cast<std::size_t>(model.config().micro_batch);
    for (std::size_t s = 0; s < samples.size(); s += B) {
        const std::size_t e = std::min(samples.size(), s + B);
        const Batch b = build_batch(one, std::span(samples).subspan(s, e - s), model.config().window);
        const nn::Matrix raw = model.forward(b);
        for (std::size_t k = s; k < e; ++k) {
            const std::size_t t = samples[k].t;
            for (int n = 0; n < kNumAgents; ++n) {
                const auto c = static_cast<Eigen::Index>((k - s) * kNumAgents + static_cast<std::size_t>(n));
                const Point own{scalers.inverse_x(std::clamp(raw(0, c), 0.0, 1.0)),
                                scalers.inverse_y(std::clamp(raw(1, c), 0.0, 1.0))};
                out.phi_hat[t][static_cast<std::size_t>(n)] =
                    from_own_goal_frame(own, m.direction_of_agent(n, m.events[t].period));
            }
        }
    }
    return out;
}

std::uint64_t fold_seed(std::uint64_t root, std::size_t fold) { return SeedTree(root).child("fold", fold).seed(); }

FoldRun train_fold(const Dataset& dataset, std::size_t fold, ModelKind kind, const ModelConfig& config,
                   const EpochCallback& on_epoch) {
    if (fold >= dataset.folds.size()) throw std::out_of_range("train_fold: fold index out of range");
    ModelConfig cfg = config;
    cfg.seed = fold_seed(config.seed, fold);
    FoldRun run;
    run.context = prepare_fold(dataset, dataset.folds[fold], cfg);
    run.model = std::make_unique<NeuralImputer>(kind, cfg);
    run.model->init(cfg.seed);
    run.result = train(*run.model, run.context, on_epoch);
    for (const PreparedMatch& pm : run.context.test) run.predictions.push_back(predict(*run.model, pm, run.context.scalers));
    return run;
}

std::vector<FoldOutcome> cross_validate(const Dataset& dataset, ModelKind kind, const ModelConfig& config,
                                        int threads) {
    std::vector<FoldOutcome> outcomes(dataset.folds.size());
    auto run_fold = [&](std::size_t k) {
        const Fold& fold = dataset.folds[k];
        FoldOutcome& o = outcomes[k];
        o.fold = static_cast<int>(k);
        if (!is_neural(kind)) {
            for (const int m : fold.test) {
                o.predictions.push_back(baseline_predict_match(kind, dataset.matches.at(static_cast<std::size_t>(m))));
            }
            return;
        }
        FoldRun run = train_fold(dataset, k, kind, config);
        o.history = std::move(run.result.history);
        o.predictions = std::move(run.predictions);
    };

    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || outcomes.size() < 2) {
        for (std::size_t k = 0; k < outcomes.size(); ++k) run_fold(k);
        return outcomes;
    }
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, outcomes.size()); ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t k;
                {
                    std::lock_guard lock(mu);
                    if (next >= outcomes.size() || failure) return;
                    k = next++;
                }
                try {
                    run_fold(k);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return outcomes;
}

MeanCI mean_ci(std::span<const double> values) {
    MeanCI r;
    if (values.empty()) return r;
    const auto k = static_cast<double>(values.size());
    for (const double v : values) r.mean += v;
    r.mean /= k;
    if (values.size() < 2) return r;
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
        r.mean = values.front();
        return r;
    }
    double ss = 0.0;
    for (const double v : values) ss += (v - r.mean) * (v - r.mean);
    r.half_width = 1.96 * std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
    return r;
}

}  // namespace imputer
